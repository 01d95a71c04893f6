#include <iostream>

#include <bergman_lab/cli.hpp>

int main(int argc, char** argv) { return bergman_lab::cli::run(argc, argv, std::cout, std::cerr); }
