#include "npqn/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return npqn::cli_main(argc, argv, std::cout, std::cerr); }
