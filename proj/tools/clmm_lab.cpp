#include "clmm/app.hpp"

int main(int argc, char** argv) { return clmm::app::run(argc, argv); }
