#include "wavebif/cli.hpp"

int main(int argc, char** argv) { return wavebif::cli::run(argc, argv); }
