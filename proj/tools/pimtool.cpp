#include "pim/cli.hpp"

int main(int argc, char** argv) { return pim::main_entry(argc, argv); }
