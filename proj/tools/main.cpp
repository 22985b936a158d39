#include "semmp/cli.hpp"

int main(int argc, char** argv) {
    return semmp::cli::run(argc, argv);
}
