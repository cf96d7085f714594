#include "qkd/cli.hpp"

int main(int argc, char** argv) {
    return qkd::cli_main(argc, argv);
}
