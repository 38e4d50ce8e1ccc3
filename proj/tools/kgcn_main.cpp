#include "kgcn/cli.hpp"

int main(int argc, char** argv) { return kgcn::run_cli(argc, argv); }
