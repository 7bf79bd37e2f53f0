#include "emacfem/cli.hpp"

int main(int argc, char** argv) { return emacfem::cli::run_cli(argc, argv); }
