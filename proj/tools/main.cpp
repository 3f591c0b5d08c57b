#include "cli.hpp"

int main(int argc, char** argv) { return bridgewatch::cli_main(argc, argv); }
