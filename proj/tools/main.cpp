#include "disvm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return disvm::cli::run(argc, argv, std::cout, std::cerr); }
