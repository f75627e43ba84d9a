#include "dmrac/cli.hpp"

int main(int argc, char** argv) { return dmrac::cli_main(argc, argv); }
