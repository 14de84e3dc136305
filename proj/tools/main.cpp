#include "cli.hpp"

int main(int argc, char** argv) { return fairsched::cli::run_cli(argc, argv); }
