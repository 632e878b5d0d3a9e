#include <iostream>

#include "retrace/pipeline.hpp"

int main(int argc, char** argv) { return retrace::cli::run(argc, argv, std::cout, std::cerr); }
