// Reproduction suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run via ctest or directly; an optional argument overrides the
// timings config path.

#include <cstdio>
#include <exception>
#include <string>

#include "msgpath/acceptance.hpp"
#include "msgpath/config_io.hpp"

int main(int argc, char** argv) {
  using namespace msgpath;
  try {
    ComponentTimings t;
    if (argc > 1) {
      t = load_timings_file(argv[1], LoadMode::require_all);
    } else {
      t = reference_timings();
    }
    auto results = run_acceptance(t);
    int failures = 0;
    for (const auto& r : results) {
      std::printf("%s  criterion %d: %s  [%s]\n", r.passed ? "PASS" : "FAIL",
                  r.id, r.name.c_str(), r.detail.c_str());
      if (!r.passed) ++failures;
    }
    std::printf("%d/%zu criteria passed\n",
                static_cast<int>(results.size()) - failures, results.size());
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
