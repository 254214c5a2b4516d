#include <iostream>

#include "medli/cli.hpp"

int main(int argc, char** argv) { return medli::cli::run(argc, argv, std::cout, std::cerr); }
