#include "msld/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return msld::cli::run(argc, argv, std::cout, std::cerr); }
