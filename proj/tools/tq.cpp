#include <iostream>

#include "tq/cli.hpp"

int main(int argc, char** argv) { return tq::run_cli(argc, argv, std::cout, std::cerr); }
