#include "cograph/cli.hpp"

int main(int argc, char** argv) { return cograph::run_cli(argc, argv); }
