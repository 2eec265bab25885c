#include "mrirdlmc/cli.hpp"

int main(int argc, char** argv) { return mrirdlmc::run(argc, argv); }
