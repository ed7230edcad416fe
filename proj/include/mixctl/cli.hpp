#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixctl/checks.hpp"
#include "mixctl/optimize.hpp"
#include "mixctl/scenario.hpp"

namespace mixctl {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNumerical = 3 };

struct ControlSpec {
    std::string type = "zero";  // zero | constant | random | file
    double bottom = 0.0;
    double top = 0.0;
    double amplitude = 1.0;
    std::string path;
    std::optional<int> mode_cap;
};

/// Fully resolved run description. Every field has a value after parsing.
struct RunSpec {
    int nx = 64;
    int ny = 65;
    double lx = 0.0;
    double ly = 1.0;
    double k = 1.0;
    double epsilon = 1e-3;
    double gamma = 1e-3;
    double horizon = 1.0;
    double cfl = kDefaultCfl;
    double vcap = 4.0;
    std::optional<int> nt;  // nt_for_cfl(vcap) when absent
    std::string theta = "stripe";
    std::string theta_snapshot;
    ControlSpec control;
    bool has_optimizer = false;
    OptConfig optimizer;
    std::vector<double> epsilon_schedule;
    std::vector<double> rate_epsilons{1e-2, 4e-3, 1e-3};
    int fd_directions = 4;
    std::filesystem::path output = "mixctl-out";
    int output_stride = 0;  // 0: endpoints only
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Parses a JSON config; unknown keys and wrong types raise ConfigError.
[[nodiscard]] RunSpec parse_run_spec(const std::string& json_text);
/// Resolved config as canonical JSON (defaults filled in).
[[nodiscard]] std::string resolved_json(const RunSpec& spec);

[[nodiscard]] Problem build_problem(const RunSpec& spec);
[[nodiscard]] ControlTrajectory build_control(const RunSpec& spec, const Problem& p);

[[nodiscard]] std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

int run_simulate(const RunSpec& spec, std::ostream& out);
int run_optimize(const RunSpec& spec, std::ostream& out);
int run_sweep_epsilon(const RunSpec& spec, std::ostream& out);
int run_checks(const RunSpec& spec, std::ostream& out);

/// Entry point: mixctl <simulate|optimize|sweep-epsilon|check|mixnorm> [flags].
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mixctl
