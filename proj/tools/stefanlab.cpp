#include "stefanlab/cli.hpp"

int main(int argc, char** argv) { return stefan::run(argc, argv); }
