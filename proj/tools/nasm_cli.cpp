#include <iostream>
#include <string>
#include <vector>

#include "nasm/cli_io.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nasm::run_command(args, std::cout, std::cerr);
}
