#include "diachron/cli.hpp"

int main(int argc, char** argv) {
    return diachron::cli::run_command(argc, argv);
}
