#include <string>
#include <vector>

#include "cpt/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cpt::run_cli(args);
}
