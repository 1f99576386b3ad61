#include <cstdio>

#include "pjipm/acceptance.hpp"

int main() {
  const auto results = pjipm::run_acceptance();
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  (%.1f s cpu%s)\n", pjipm::format_result_line(r).c_str(), r.seconds,
                r.budget > 0.0 ? (", budget " + pjipm::format_double(r.budget) + " s").c_str() : "");
    failed += !r.pass;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
