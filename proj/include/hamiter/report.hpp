#pragma once

#include <string>
#include <vector>

namespace hamiter {

/// One invariant gate: `ref` names the law being checked.
struct Check {
  std::string name;
  std::string ref;
  bool pass = false;
  std::string detail;
};

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace hamiter
