#include "moo/cli.hpp"

int main(int argc, char** argv) { return moo::cli_main(argc, argv); }
