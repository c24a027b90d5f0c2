#include "simmst/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace simmst {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed() ? "PASS" : "FAIL") << " max_rel_err=" << max_rel_err
     << " tol=" << tolerance << " step=" << step << "\n";
  for (const auto& e : per_leaf) {
    os << "  " << e.name << " max_rel_err=" << e.max_rel_err;
    if (e.worst_index >= 0)
      os << " (flat " << e.worst_index << ": analytic=" << e.analytic
         << " numeric=" << e.numeric << ")";
    os << "\n";
  }
  return os.str();
}

GradCheckReport gradient_check(
    const std::function<Tensor()>& loss_fn,
    const std::vector<std::pair<std::string, Tensor>>& leaves, double step,
    double tolerance) {
  if (!loss_fn) throw ContractError("gradient_check: null loss function");
  if (step <= 0.0 || tolerance <= 0.0)
    throw ContractError("gradient_check: step and tolerance must be positive");
  for (const auto& [name, leaf] : leaves) {
    if (!leaf.defined())
      throw ContractError("gradient_check: leaf '" + name + "' is undefined");
    if (!leaf.requires_grad())
      throw ContractError("gradient_check: leaf '" + name +
                          "' does not require grad");
  }

  // Analytic pass.
  std::vector<std::vector<double>> analytic;
  {
    for (const auto& [name, leaf] : leaves) {
      Tensor t = leaf;
      t.zero_grad();
    }
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = loss_fn();
    if (loss.numel() != 1)
      throw ContractError("gradient_check: loss must be scalar, got " +
                          shape_to_string(loss.shape()));
    tape.backward(loss);
    for (const auto& [name, leaf] : leaves) analytic.push_back(leaf.grad());
  }

  // Numeric pass; no tape active, so ops do not record.
  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  for (size_t li = 0; li < leaves.size(); ++li) {
    const auto& [name, leaf] = leaves[li];
    GradCheckEntry entry;
    entry.name = name;
    Tensor t = leaf;
    auto& vals = t.values_mut();
    for (size_t i = 0; i < vals.size(); ++i) {
      double saved = vals[i];
      vals[i] = saved + step;
      double f_plus = loss_fn().scalar_value();
      vals[i] = saved - step;
      double f_minus = loss_fn().scalar_value();
      vals[i] = saved;
      double numeric = (f_plus - f_minus) / (2.0 * step);
      double a = analytic[li][i];
      double abs_err = std::fabs(a - numeric);
      double rel_err =
          abs_err / std::max({std::fabs(a), std::fabs(numeric), 1e-6});
      if (rel_err > entry.max_rel_err) {
        entry.max_rel_err = rel_err;
        entry.max_abs_err = abs_err;
        entry.worst_index = static_cast<int64_t>(i);
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_leaf.push_back(std::move(entry));
  }
  return report;
}

}  // namespace simmst
