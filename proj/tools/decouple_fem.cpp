#include <iostream>

#include "decouple/cli.hpp"

int main(int argc, char** argv) { return decouple::cli::run(argc, argv, std::cout, std::cerr); }
