#include "besov/cli.hpp"

int main(int argc, char** argv) { return besov::cli::run(argc, argv); }
