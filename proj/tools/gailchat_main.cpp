#include "gailchat/cli.hpp"

int main(int argc, char** argv) { return gailchat::run(argc, argv); }
