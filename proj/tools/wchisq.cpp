#include <iostream>

#include "wchisq/cli.hpp"

int main(int argc, char** argv) { return wchisq::cli::run(argc, argv, std::cout, std::cerr); }
