#include "minshap/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return minshap::cli::run(argc, argv, std::cout, std::cerr); }
