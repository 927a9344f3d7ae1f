#include "dembed/cli.hpp"

int main(int argc, char** argv) { return dembed::cli::main(argc, argv); }
