#include "sob/cli.hpp"

int main(int argc, char** argv) {
    return sob::cli_main(argc, argv);
}
