#include "measlab/cli.hpp"

int main(int argc, char** argv) {
  return measlab::run_command(std::vector<std::string>(argv, argv + argc));
}
