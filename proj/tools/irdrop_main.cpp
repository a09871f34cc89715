#include "irdrop/cli.hpp"

int main(int argc, char** argv) {
    return irdrop::cli_run(argc, argv);
}
