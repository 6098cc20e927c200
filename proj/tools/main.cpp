#include "sorryforge/cli.hpp"

int main(int argc, char** argv) { return sorryforge::dispatch(argc, argv); }
