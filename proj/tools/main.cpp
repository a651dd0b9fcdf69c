#include "spermmorph/cli.hpp"

int main(int argc, char** argv) { return spermmorph::run_cli(argc, argv); }
