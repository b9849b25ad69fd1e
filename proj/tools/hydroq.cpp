#include "hydroq/cli.hpp"

int main(int argc, char** argv) { return hydroq::cli::main(argc, argv); }
