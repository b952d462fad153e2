#include "saftlab/cli.hpp"

int main(int argc, char** argv) { return saftlab::cli::run(argc, argv); }
