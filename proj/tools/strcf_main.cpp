#include "commands.hpp"

int main(int argc, char** argv) { return strcf::cli::run(argc, argv); }
