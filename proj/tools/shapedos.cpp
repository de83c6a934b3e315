#include <iostream>

#include "shapedos/cli.hpp"

int main(int argc, char** argv) { return shapedos::run(argc, argv, std::cout, std::cerr); }
