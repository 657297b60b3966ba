#include "cli.hpp"

int main(int argc, char** argv) { return ppcalc::app::run_cli(argc, argv); }
