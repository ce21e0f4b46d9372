#include <iostream>

#include "qtwist/cli.hpp"

int main(int argc, char** argv) { return qtwist::cli::main(argc, argv, std::cout, std::cerr); }
