// Prints one PASS/FAIL line per acceptance criterion. With an argument, runs
// only the listed criterion ids.
#include <cstdlib>
#include <iostream>
#include <string>

#include "geoflow/verify.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int id = 1; id <= geoflow::kCriterionCount; ++id) ids.push_back(id);
  bool ok = true;
  for (int id : ids) {
    const geoflow::CriterionResult r = geoflow::run_criterion(id);
    std::cout << geoflow::format_line(r) << std::endl;
    ok = ok && r.pass();
  }
  return ok ? 0 : 1;
}
