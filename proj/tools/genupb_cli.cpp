#include "genupb/commands.hpp"

int main(int argc, char** argv) { return genupb::cli::run(argc, argv); }
