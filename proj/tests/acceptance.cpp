#include <cstdio>
#include <cstdlib>
#include <string>

#include "wpi/acceptance.hpp"

// Usage: acceptance [criterion-number ...]; all criteria when none are given.
int main(int argc, char** argv) {
  wpi::AcceptanceOptions opt;
  if (const char* p = std::getenv("WPI_PARALLELISM")) opt.parallelism = unsigned(std::max(1, std::atoi(p)));
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::size_t(std::stoul(argv[i]) - 1));
  if (which.empty())
    for (std::size_t i = 0; i < wpi::acceptance_criteria().size(); ++i) which.push_back(i);
  int failed = 0;
  for (std::size_t i : which) {
    auto r = wpi::run_criterion(i, opt);
    std::printf("%s\n", wpi::format_result(r).c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
