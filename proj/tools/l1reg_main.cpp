#include <iostream>

#include "l1reg/cli/commands.hpp"

int main(int argc, char** argv) { return l1reg::cli::run_cli(argc, argv, std::cout, std::cerr); }
