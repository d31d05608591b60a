#include <iostream>
#include <string>
#include <vector>

#include "v2xalloc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return v2x::run_cli(args, std::cout, std::cerr);
}
