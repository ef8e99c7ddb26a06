#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace detvar {

struct IdentityResidual {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double relative = 0.0;  // |lhs - rhs| / max(1, scale)
};

struct IdentityReport {
  std::vector<IdentityResidual> entries;

  void add(std::string name, double lhs, double rhs, double scale) {
    entries.push_back({std::move(name), lhs, rhs, std::abs(lhs - rhs) / std::max(1.0, scale)});
  }

  //! Largest relative residual among entries whose name starts with `prefix`.
  double max_relative(const std::string& prefix = "") const {
    double worst = 0.0;
    for (const auto& e : entries)
      if (e.name.rfind(prefix, 0) == 0) worst = std::max(worst, e.relative);
    return worst;
  }

  std::size_t count(const std::string& prefix) const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [&](const auto& e) { return e.name.rfind(prefix, 0) == 0; }));
  }
};

}  // namespace detvar
