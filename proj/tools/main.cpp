#include <iostream>
#include <string>
#include <vector>

#include "v2g/app/cli.hpp"

int main(int argc, char** argv) {
    return v2g::app::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
