#include <iostream>

#include "mixctl/cli.hpp"

int main(int argc, char** argv) { return mixctl::run_cli(argc, argv, std::cout, std::cerr); }
