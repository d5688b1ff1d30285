#include <iostream>

#include "dmcle/cli.hpp"

int main(int argc, char** argv) { return dmcle::cli::run(argc, argv, std::cout, std::cerr); }
