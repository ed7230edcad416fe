#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mixctl/grid.hpp"
#include "mixctl/mixnorm.hpp"
#include "mixctl/optimize.hpp"
#include "mixctl/stokes.hpp"
#include "mixctl/transport.hpp"

namespace mixctl {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw array in the snapshot layout: "MIXFLD01", int32 nx, int32 ny, 8 reserved
/// bytes, then nx*ny little-endian doubles with x fastest.
struct RawField {
    int nx = 0;
    int ny = 0;
    std::vector<double> data;
};

void write_raw(const std::filesystem::path& path, const RawField& f);
[[nodiscard]] RawField read_raw(const std::filesystem::path& path);

void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
/// Reads a scalar snapshot onto a channel of the given lengths.
[[nodiscard]] ScalarField read_snapshot(const std::filesystem::path& path, double lx, double ly);

/// Directory with u_NNNNNN.bin (nx x ny), v_NNNNNN.bin (nx x ny+1) and manifest.json.
/// Only steps n % stride == 0 and the last step are written.
void write_velocity(const std::filesystem::path& dir, const VelocityTrajectory& v, double k, int stride = 1);
/// Reads a directory written with stride 1.
[[nodiscard]] VelocityTrajectory read_velocity(const std::filesystem::path& dir);

/// Directory with theta_NNNNNN.bin per stored step and manifest.json.
void write_scalar(const std::filesystem::path& dir, const ScalarTrajectory& s, double k);

/// bottom.bin and top.bin, each nx x (nt+1): row n holds g(t_n).
void write_control(const std::filesystem::path& dir, const ControlTrajectory& g);
[[nodiscard]] ControlTrajectory read_control(const std::filesystem::path& dir, const Grid& grid, double dt);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<TransportDiagnostics>& d);
void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& h);

[[nodiscard]] std::string to_json(const CostReport& c);
/// Summary of an optimization run; the control itself is written with write_control.
[[nodiscard]] std::string to_json(const OptResult& r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mixctl
