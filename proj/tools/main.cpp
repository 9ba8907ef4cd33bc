#include <iostream>

#include "capscale/cli.hpp"

int main(int argc, char** argv) { return capscale::run_cli(argc, argv, std::cout, std::cerr); }
