#include "thickspray/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return thickspray::dispatch(argc, argv, std::cout, std::cerr); }
