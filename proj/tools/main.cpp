#include "cli.hpp"

int main(int argc, char** argv) { return obsplan::cli::run(argc, argv); }
