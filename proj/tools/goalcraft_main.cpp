#include "goalcraft/commands.hpp"

int main(int argc, char** argv) { return goalcraft::run_cli(argc, argv); }
