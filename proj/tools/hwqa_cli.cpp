#include "hwqa/cli.hpp"

int main(int argc, char** argv) { return hwqa::cli::main(argc, argv); }
