#include <string>
#include <vector>

#include "grb/cli.hpp"

int main(int argc, char** argv) { return grb::run_command(std::vector<std::string>(argv, argv + argc)); }
