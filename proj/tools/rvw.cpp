#include "cli.hpp"

int main(int argc, char** argv) { return rvw::cli::run_cli(argc, argv); }
