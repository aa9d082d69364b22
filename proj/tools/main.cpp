#include "gifslab/cli.hpp"

int main(int argc, char** argv) { return gifslab::run_cli(argc, argv); }
