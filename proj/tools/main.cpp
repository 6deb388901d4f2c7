#include <iostream>

#include "amcmc/cli.hpp"

int main(int argc, char** argv) { return amcmc::run_cli(argc, argv, std::cout, std::cerr); }
