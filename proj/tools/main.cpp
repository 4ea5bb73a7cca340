#include <iostream>

#include "fracavg/cli.hpp"

int main(int argc, char** argv) { return fracavg::run_cli(argc, argv, std::cout, std::cerr); }
