#include "kakulab/harness.hpp"

int main(int argc, char** argv) { return kakulab::harness::run_cli(argc, argv); }
