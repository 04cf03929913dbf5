#include "sdsbm/cli.hpp"

int main(int argc, char** argv) { return sdsbm::cli::cli_main(argc, argv); }
