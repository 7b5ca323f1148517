#include "borelheat/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return borelheat::cli::run(argc, argv, std::cout, std::cerr); }
