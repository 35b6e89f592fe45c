#include <iostream>

#include "astcost/cli.hpp"

int main(int argc, char** argv) { return astcost::cli::run(argc, argv, std::cout, std::cerr); }
