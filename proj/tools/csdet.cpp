#include "csd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return csd::cli::run_cli(argc, argv, std::cout, std::cerr);
}
