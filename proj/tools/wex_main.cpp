#include "wex/cli.hpp"

int main(int argc, char** argv) { return wex::run_cli(argc, argv); }
