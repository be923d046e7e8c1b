#include <iostream>

#include "sise/cli.hpp"

int main(int argc, char** argv) { return sise::cli::run(argc, argv, std::cout, std::cerr); }
