#include "coexist/cli.hpp"

int main(int argc, char** argv) { return coexist::cli::run_cli(argc, argv); }
