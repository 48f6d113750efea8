#include "pcast/cli.hpp"

int main(int argc, char** argv) { return pcast::cli::run_cli(argc, argv); }
