#include "assq/cli.hpp"

int main(int argc, char **argv) { return assq::cli::run_cli(argc, argv); }
