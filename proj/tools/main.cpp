#include <iostream>

#include "oscilla/cli.hpp"

int main(int argc, char** argv) { return oscilla::run_cli(argc, argv, std::cout, std::cerr); }
