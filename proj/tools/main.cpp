#include "topictrace/cli.hpp"

int main(int argc, char** argv) {
    return topictrace::cli::run(argc, argv);
}
