#include "mrident/cli.hpp"

int main(int argc, char** argv) { return mrident::run_cli(argc, argv); }
