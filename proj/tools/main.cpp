#include "commands.hpp"

int main(int argc, char** argv) { return ndpmpm::cli::run_cli(argc, argv); }
