#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reachsched {

/// Immutable class-K function built from a small algebra of forms.
///
/// eval(+inf) = +inf for every form. Negative arguments are rejected.
class ClassKFunction {
 public:
  struct Node;

  /// a r
  static ClassKFunction linear(double a);
  /// a r^p, p > 0
  static ClassKFunction power(double a, double p);
  /// sum_i a_i r^{p_i}; terms are (coefficient, exponent) with both positive
  static ClassKFunction polynomial(std::vector<std::pair<double, double>> terms);
  /// outer(inner(r))
  static ClassKFunction compose(const ClassKFunction& outer, const ClassKFunction& inner);
  /// min(f(r), (1 - eps) r)
  static ClassKFunction min_identity(const ClassKFunction& f, double eps);

  double eval(double r) const;
  double operator()(double r) const { return eval(r); }

  /// r with f(r) = y. Closed form where available, bisection otherwise.
  double invert(double y) const;
  ClassKFunction inverse() const;

  /// Registers a domain horizon; invert() then rejects y > f(horizon).
  ClassKFunction with_horizon(double horizon) const;
  std::optional<double> horizon() const { return horizon_; }

  /// Nonzero when the function is exactly a r (after simplification).
  std::optional<double> linear_coefficient() const;

  std::string describe() const;

 private:
  explicit ClassKFunction(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
  std::optional<double> horizon_;
};

}  // namespace reachsched
