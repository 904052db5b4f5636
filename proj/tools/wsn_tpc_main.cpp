#include "wsntpc/cli.hpp"

int main(int argc, char** argv) { return wsntpc::run_cli(argc, argv); }
