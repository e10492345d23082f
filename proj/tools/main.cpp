#include "d2d/experiment.hpp"

int main(int argc, char** argv) { return d2d::run_cli(argc, argv); }
