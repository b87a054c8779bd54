#include <iostream>

#include "bcsgap/commands.hpp"

int main(int argc, char** argv) { return bcsgap::run_cli(argc, argv, std::cout, std::cerr); }
