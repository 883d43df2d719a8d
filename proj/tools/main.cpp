#include "cli.hpp"

int main(int argc, char** argv) { return bali::cli::run(argc, argv); }
