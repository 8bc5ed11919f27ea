#include "chpca_cli.hpp"

int main(int argc, char** argv) { return chpca::cli::run_cli(argc, argv); }
