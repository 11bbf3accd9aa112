#pragma once

#include <string>
#include <vector>

namespace quadenv {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed;
  std::string detail;
};

/// Desk-scale theorem checks behind `quadenv verify`. Suites: identity,
/// double_transform, monotonicity, curvature, sandwich, minima, spectral; "all"
/// runs every suite.
std::vector<CheckResult> run_verification(const std::string& suite);

const std::vector<std::string>& verification_suites();

}  // namespace quadenv
