#include <iostream>

#include "skewerg/runner.hpp"

int main(int argc, char** argv) { return skewerg::run_cli(argc, argv, std::cout, std::cerr); }
