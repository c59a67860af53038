#include "ctsid/cli.hpp"

int main(int argc, char** argv) { return ctsid::run_cli(argc, argv); }
