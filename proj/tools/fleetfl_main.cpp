#include <iostream>

#include "fleetfl/cli.hpp"

int main(int argc, char** argv) { return fleetfl::cli::run_cli(argc, argv, std::cout, std::cerr); }
