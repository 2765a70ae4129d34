#include "pnnsr/cli.hpp"

int main(int argc, char** argv) { return pnnsr::cli_main(argc, argv); }
