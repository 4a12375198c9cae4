#include <iostream>

#include "mmcomm/cli.hpp"

int main(int argc, char** argv) { return mmcomm::cli::run_cli(argc, argv, std::cout, std::cerr); }
