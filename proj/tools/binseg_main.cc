#include <iostream>

#include "binseg/commands.h"

int main(int argc, char** argv) { return binseg::runCli(argc, argv, std::cout, std::cerr); }
