#include "flatlab/cli.hpp"

int main(int argc, char** argv) { return flatlab::run_cli(argc, argv); }
