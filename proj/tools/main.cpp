#include "riskalloc/cli.hpp"

int main(int argc, char** argv) { return riskalloc::cli::run(argc, argv); }
