#include <iostream>

#include "ci/cli.hpp"

int main(int argc, char** argv) { return ci::cli_main(argc, argv, std::cout, std::cerr); }
