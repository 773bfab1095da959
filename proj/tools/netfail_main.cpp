#include "netfail/cli.hpp"

int main(int argc, char** argv) {
    return netfail::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
