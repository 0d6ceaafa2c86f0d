#include "srdev/cli.hpp"

int main(int argc, char** argv) { return srdev::run(argc, argv); }
