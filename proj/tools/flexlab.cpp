#include <iostream>
#include <string>
#include <vector>

#include "flexlab/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return flexlab::app::run(args, std::cout, std::cerr);
}
