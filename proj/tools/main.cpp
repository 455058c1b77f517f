// omspec command-line tool; all logic lives in omspec::cli::run so tests can
// drive the subcommands in-process.

#include <string>
#include <vector>

#include <omspec/cli.hpp>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return omspec::cli::run(std::move(args));
}
