#include <iostream>
#include <string>
#include <vector>

#include "hearth/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return hearth::cli::run(args, std::cout, std::cerr);
}
