#include "mcid/harness/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mcid::harness::run_cli(argc, argv, std::cout, std::cerr); }
