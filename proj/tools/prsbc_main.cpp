#include "prsbc/cli.hpp"

int main(int argc, char** argv) { return prsbc::cli::main(argc, argv); }
