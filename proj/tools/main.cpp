#include <iostream>

#include "phientropy/cli.hpp"

int main(int argc, char** argv) { return phientropy::cli::main_entry(argc, argv, std::cout, std::cerr); }
