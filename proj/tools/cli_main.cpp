#include <string>
#include <vector>

#include "pricelab/cli.hpp"

int main(int argc, char** argv) {
  return pricelab::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
