#include <string>
#include <vector>

#include "sva/commands.hpp"

int main(int argc, char** argv) {
  return sva::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
