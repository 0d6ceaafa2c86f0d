#include <iostream>

#include "srdev/acceptance.hpp"

int main() {
  srdev::SuiteOptions opts;
  const auto results = srdev::run_acceptance(opts, &std::cout);
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " acceptance criteria passed" << std::endl;
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
