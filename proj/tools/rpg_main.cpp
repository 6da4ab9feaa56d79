#include <vector>

#include "rpg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rpg::run_command(args);
}
