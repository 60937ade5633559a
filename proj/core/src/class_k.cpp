#include "reachsched/class_k.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "reachsched/errors.hpp"

namespace reachsched {

struct ClassKFunction::Node {
  enum class Kind { kPower, kPolynomial, kCompose, kMinIdentity, kInverse };
  Kind kind = Kind::kPower;
  double a = 1.0;
  double p = 1.0;
  double eps = 0.0;
  std::vector<std::pair<double, double>> terms;
  std::shared_ptr<const Node> first;   // outer / wrapped
  std::shared_ptr<const Node> second;  // inner
};

namespace {

using Node = ClassKFunction::Node;
using NodePtr = std::shared_ptr<const Node>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_node(const Node& n, double r);
double invert_node(const Node& n, double y);

double bisect(const Node& n, double y) {
  double lo = 0.0;
  double hi = 1.0;
  while (eval_node(n, hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw OutOfRange("class-K inverse: value not attained");
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval_node(n, mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double f_lo = eval_node(n, lo);
  const double f_hi = eval_node(n, hi);
  return (y - f_lo <= f_hi - y) ? lo : hi;
}

double eval_node(const Node& n, double r) {
  switch (n.kind) {
    case Node::Kind::kPower:
      return n.p == 1.0 ? n.a * r : n.a * std::pow(r, n.p);
    case Node::Kind::kPolynomial: {
      double acc = 0.0;
      for (const auto& [a, p] : n.terms) acc += (p == 1.0 ? a * r : a * std::pow(r, p));
      return acc;
    }
    case Node::Kind::kCompose:
      return eval_node(*n.first, eval_node(*n.second, r));
    case Node::Kind::kMinIdentity:
      return std::min(eval_node(*n.first, r), (1.0 - n.eps) * r);
    case Node::Kind::kInverse:
      return invert_node(*n.first, r);
  }
  return 0.0;
}

double invert_node(const Node& n, double y) {
  if (y == 0.0) return 0.0;
  if (y == kInf) return kInf;
  switch (n.kind) {
    case Node::Kind::kPower:
      return n.p == 1.0 ? y / n.a : std::pow(y / n.a, 1.0 / n.p);
    case Node::Kind::kPolynomial:
      return bisect(n, y);
    case Node::Kind::kCompose:
      return invert_node(*n.second, invert_node(*n.first, y));
    case Node::Kind::kMinIdentity:
      return std::max(invert_node(*n.first, y), y / (1.0 - n.eps));
    case Node::Kind::kInverse:
      return eval_node(*n.first, y);
  }
  return 0.0;
}

NodePtr make_power(double a, double p) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kPower;
  n->a = a;
  n->p = p;
  return n;
}

void describe_node(const Node& n, std::ostringstream& os) {
  switch (n.kind) {
    case Node::Kind::kPower:
      if (n.p == 1.0) {
        os << n.a << "*r";
      } else {
        os << n.a << "*r^" << n.p;
      }
      break;
    case Node::Kind::kPolynomial:
      for (std::size_t i = 0; i < n.terms.size(); ++i) {
        if (i) os << " + ";
        os << n.terms[i].first << "*r^" << n.terms[i].second;
      }
      break;
    case Node::Kind::kCompose:
      os << "(";
      describe_node(*n.first, os);
      os << ")o(";
      describe_node(*n.second, os);
      os << ")";
      break;
    case Node::Kind::kMinIdentity:
      os << "min(";
      describe_node(*n.first, os);
      os << ", " << (1.0 - n.eps) << "*r)";
      break;
    case Node::Kind::kInverse:
      os << "inv(";
      describe_node(*n.first, os);
      os << ")";
      break;
  }
}

}  // namespace

ClassKFunction ClassKFunction::linear(double a) { return power(a, 1.0); }

ClassKFunction ClassKFunction::power(double a, double p) {
  if (!(a > 0.0) || !(p > 0.0) || !std::isfinite(a) || !std::isfinite(p)) {
    throw ContractViolation("class-K power form needs a > 0 and p > 0");
  }
  return ClassKFunction(make_power(a, p));
}

ClassKFunction ClassKFunction::polynomial(std::vector<std::pair<double, double>> terms) {
  if (terms.empty()) throw ContractViolation("class-K polynomial needs at least one term");
  for (const auto& [a, p] : terms) {
    if (!(a > 0.0) || !(p > 0.0)) throw ContractViolation("class-K polynomial terms must be positive");
  }
  if (terms.size() == 1) return power(terms[0].first, terms[0].second);
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kPolynomial;
  n->terms = std::move(terms);
  return ClassKFunction(n);
}

ClassKFunction ClassKFunction::compose(const ClassKFunction& outer, const ClassKFunction& inner) {
  const Node& o = *outer.node_;
  const Node& i = *inner.node_;
  if (o.kind == Node::Kind::kPower && i.kind == Node::Kind::kPower) {
    return ClassKFunction(make_power(o.a * std::pow(i.a, o.p), o.p * i.p));
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kCompose;
  n->first = outer.node_;
  n->second = inner.node_;
  return ClassKFunction(n);
}

ClassKFunction ClassKFunction::min_identity(const ClassKFunction& f, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw ContractViolation("min_identity needs 0 < eps < 1");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kMinIdentity;
  n->first = f.node_;
  n->eps = eps;
  return ClassKFunction(n);
}

double ClassKFunction::eval(double r) const {
  if (std::isnan(r) || r < 0.0) throw ContractViolation("class-K function evaluated at a negative argument");
  if (r == 0.0) return 0.0;
  return eval_node(*node_, r);
}

double ClassKFunction::invert(double y) const {
  if (std::isnan(y) || y < 0.0) throw ContractViolation("class-K inverse of a negative value");
  if (horizon_ && y > eval_node(*node_, *horizon_) * (1.0 + 1e-12)) {
    throw OutOfRange("class-K inverse: value beyond the registered horizon");
  }
  return invert_node(*node_, y);
}

ClassKFunction ClassKFunction::inverse() const {
  const Node& n = *node_;
  if (n.kind == Node::Kind::kPower) return ClassKFunction(make_power(std::pow(1.0 / n.a, 1.0 / n.p), 1.0 / n.p));
  if (n.kind == Node::Kind::kInverse) return ClassKFunction(n.first);
  auto inv = std::make_shared<Node>();
  inv->kind = Node::Kind::kInverse;
  inv->first = node_;
  return ClassKFunction(inv);
}

ClassKFunction ClassKFunction::with_horizon(double horizon) const {
  if (!(horizon > 0.0)) throw ContractViolation("class-K horizon must be positive");
  ClassKFunction out = *this;
  out.horizon_ = horizon;
  return out;
}

std::optional<double> ClassKFunction::linear_coefficient() const {
  if (node_->kind == Node::Kind::kPower && node_->p == 1.0) return node_->a;
  return std::nullopt;
}

std::string ClassKFunction::describe() const {
  std::ostringstream os;
  describe_node(*node_, os);
  return os.str();
}

}  // namespace reachsched
