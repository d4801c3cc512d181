#include "erbr/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return erbr::cli::run(args, {std::cin, std::cout, std::cerr, isatty(STDOUT_FILENO) != 0});
}
