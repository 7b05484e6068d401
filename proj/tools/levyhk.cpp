#include <iostream>

#include "levyhk/cli.hpp"

int main(int argc, char** argv) { return levyhk::run_cli(argc, argv, std::cout, std::cerr); }
