#include "selfplay/cli.hpp"

int main(int argc, char** argv) { return selfplay::cli::run(argc, argv); }
