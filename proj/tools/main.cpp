#include <cstdio>
#include <string>
#include <vector>

#include "sheaflens/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  sheaflens::cli::RunResult result = sheaflens::cli::run(args);
  std::fputs(result.text.c_str(), result.exit_code == 0 ? stdout : stderr);
  return result.exit_code;
}
