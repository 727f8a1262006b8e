#include "carve/refvm.hpp"

int main(int argc, char** argv) { return carve::refvm::harness_main(argc, argv); }
