#include <iostream>

#include "hotspot_cli/commands.hpp"

int main(int argc, char** argv) { return hotspot::cli::run(argc, argv, std::cout, std::cerr); }
