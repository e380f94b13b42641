#include "latstat/cli.hpp"

int main(int argc, char** argv) { return latstat::cli::dispatch(argc, argv); }
