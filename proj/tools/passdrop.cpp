#include "passdrop/cli.hpp"

int main(int argc, char** argv) { return passdrop::cli::run(argc, argv); }
