#include "attribqa/cli.hpp"

int main(int argc, char** argv) { return attribqa::cli::main(argc, argv); }
