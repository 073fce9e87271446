#include "mems/run.hpp"

#include <iostream>

int main(int argc, char** argv) { return mems::main_entry(argc, argv, std::cout, std::cerr); }
