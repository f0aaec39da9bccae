#include "ascert/cli.hpp"

int main(int argc, char** argv) { return ascert::run_cli(argc, argv); }
