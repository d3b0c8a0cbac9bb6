#include <iostream>

#include "cosearch/cli.hpp"

int main(int argc, char** argv) { return cosearch::run_cli(argc, argv, std::cout, std::cerr); }
