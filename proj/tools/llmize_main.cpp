#include "llmize/cli.hpp"

int main(int argc, char** argv) { return llmize::cli::main_with_args(argc, argv); }
