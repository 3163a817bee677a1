#include "egoadl/cli.hpp"

int main(int argc, char** argv) { return egoadl::cli::run(argc, argv); }
