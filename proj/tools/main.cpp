#include <string>
#include <vector>

#include "dtrbo/cli.hpp"

int main(int argc, char** argv) {
  return dtrbo::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
