#include "hf/cli.hpp"

int main(int argc, char** argv) { return hf::cli::run(argc, argv); }
