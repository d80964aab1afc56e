#include "auxcop/cli.hpp"

int main(int argc, char** argv) { return auxcop::run_cli(argc, argv); }
