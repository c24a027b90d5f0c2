#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "simmst/tensor.hpp"

namespace simmst {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int64_t worst_index = -1;  // flat index of the worst element
  double analytic = 0.0;     // values at the worst element
  double numeric = 0.0;
};

struct GradCheckReport {
  double step = 0.0;
  double tolerance = 0.0;
  double max_rel_err = 0.0;
  std::vector<GradCheckEntry> per_leaf;
  bool passed() const { return max_rel_err < tolerance; }
  std::string summary() const;
};

// Compares tape gradients of loss_fn() against central finite differences.
// loss_fn must be a deterministic scalar function of the listed leaves; it is
// invoked once under a fresh tape for the analytic pass and twice per leaf
// element (outside any tape) for the numeric pass. Relative error uses
// |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport gradient_check(
    const std::function<Tensor()>& loss_fn,
    const std::vector<std::pair<std::string, Tensor>>& leaves,
    double step = 1e-5, double tolerance = 1e-4);

}  // namespace simmst
