#include "cli.hpp"

int main(int argc, char** argv) { return gwpark::cli::run_cli(argc, argv); }
