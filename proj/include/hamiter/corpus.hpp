#pragma once

// Named germs used by scenarios and tests.  Every germ has an isolated fixed
// point at the origin; the double well has two more on the x-axis.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hamiter/hamflow.hpp"

namespace hamiter {

using Params = std::map<std::string, double>;

struct CorpusEntry {
  std::string name;
  std::string formula;
  int n = 1;
  Params defaults;
  std::function<HamiltonianGerm(const Params&)> make;
};

const std::vector<CorpusEntry>& corpus();

/// Throws UnknownFormula.
const CorpusEntry& corpus_entry(const std::string& name);

/// Builds a germ with `overrides` applied to the defaults; unknown parameter
/// names are rejected.  `box_radius` > 0 replaces the default domain.
HamiltonianGerm make_germ(const std::string& name, const Params& overrides = {}, double box_radius = 0.0);

}  // namespace hamiter
