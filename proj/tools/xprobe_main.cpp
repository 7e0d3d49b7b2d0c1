#include <iostream>

#include "xprobe/cli.hpp"

int main(int argc, char** argv) { return xprobe::cli::run(argc, argv, std::cout, std::cerr); }
