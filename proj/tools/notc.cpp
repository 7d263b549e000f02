#include "notc/cli.hpp"

int main(int argc, char** argv) {
  return notc::cli::main(std::vector<std::string>(argv + 1, argv + argc));
}
