#include <iostream>

#include "compstat/cli.hpp"

int main(int argc, char** argv) { return compstat::run_cli(argc, argv, std::cout, std::cerr); }
