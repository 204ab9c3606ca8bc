#include <iostream>
#include <string>
#include <vector>

#include "maxdp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return maxdp::cli_main(std::move(args), std::cout, std::cerr);
}
