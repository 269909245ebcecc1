#include "dsst/cli.hpp"

int main(int argc, char** argv) { return dsst::cli_main(argc, argv); }
