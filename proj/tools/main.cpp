#include "prefforge/cli/dispatch.hpp"

int main(int argc, char** argv) { return prefforge::cli::main_entry(argc, argv); }
