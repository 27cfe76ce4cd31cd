#include "conepos/cli.hpp"

int main(int argc, char** argv) { return conepos::cli::run(argc, argv); }
