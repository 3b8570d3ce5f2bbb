#include <iostream>

#include "halmos_cli.hpp"

int main(int argc, char** argv) { return halmos::cli::run_cli(argc, argv, std::cout, std::cerr); }
