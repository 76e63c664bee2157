#include "jpr/cli/cli.hpp"

int main(int argc, char** argv) { return jpr::cli::run_cli(argc, argv); }
