#include "scmcf/cli.hpp"

int main(int argc, char** argv) { return scmcf::cli::main(argc, argv); }
