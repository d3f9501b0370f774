#include "fbcomm/cli.hpp"

int main(int argc, char** argv) { return fbcomm::run_cli(argc, argv); }
