#include <iostream>

#include "agechem_cli/run.hpp"

int main(int argc, char** argv) { return agechem::cli::run_cli(argc, argv, std::cout, std::cerr); }
