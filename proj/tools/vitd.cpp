#include <vector>

#include "vitd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vitd::cli::run(std::move(args));
}
