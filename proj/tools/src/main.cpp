#include <string>
#include <vector>

#include "dms_cli/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return dms::cli::run_command(args);
}
