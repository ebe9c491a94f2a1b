#include "cli_app.hpp"

int main(int argc, char** argv) { return jacobi_scatter::cli::run(argc, argv); }
