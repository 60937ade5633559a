#include "reachsched/lyapunov.hpp"

#include <cmath>
#include <random>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

double sigma_max(const Mat& M) { return Eigen::JacobiSVD<Mat>(M).singularValues()(0); }

double sigma_min(const Mat& M) {
  const Vec s = Eigen::JacobiSVD<Mat>(M).singularValues();
  return s(s.size() - 1);
}

std::pair<double, double> spectrum_bounds(const Mat& S) {
  if (S.rows() == 2 && S.cols() == 2) return symmetric_eigenvalues_2x2(S);
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

std::vector<Vec> grid_points(const SystemModel& sys, int density) {
  const auto [lo, hi] = sys.free_space().bounding_box();
  const int n = sys.state_dim();
  std::vector<Vec> out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / (density - 1);
    if (sys.free_space().contains(x)) out.push_back(x);
    int i = 0;
    while (i < n && ++idx[i] == density) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

std::vector<Vec> input_samples(const SystemModel& sys) {
  const int m = sys.input_dim();
  const double r = sys.u_max();
  std::vector<Vec> out{Vec::Zero(m)};
  if (r == 0.0) return out;
  if (m == 2) {
    for (int i = 0; i < 8; ++i) {
      const double th = 2.0 * M_PI * i / 8.0;
      Vec u(2);
      u << r * std::cos(th), r * std::sin(th);
      out.push_back(u);
    }
    return out;
  }
  for (int i = 0; i < m; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec u = Vec::Zero(m);
      u(i) = s * r;
      out.push_back(u);
    }
  }
  return out;
}

std::vector<Vec> disturbance_samples(const SystemModel& sys) {
  const int nw = sys.disturbance_dim();
  std::vector<Vec> out{Vec::Zero(nw)};
  if (sys.w_max() == 0.0) return out;
  for (int i = 0; i < nw; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec w = Vec::Zero(nw);
      w(i) = s * sys.w_max();
      out.push_back(w);
    }
  }
  return out;
}

void record(InequalityCheck& check, double slack, double tol, const ViolatingTuple& tuple) {
  ++check.evaluated;
  check.worst_slack = std::min(check.worst_slack, slack);
  if (slack < -tol) {
    ++check.violations;
    if (!check.first_violation) {
      check.first_violation = tuple;
      check.first_violation->slack = slack;
    }
  }
}

}  // namespace

std::pair<double, double> symmetric_eigenvalues_2x2(const Mat& S) {
  if (S.rows() != 2 || S.cols() != 2) throw ContractViolation("expected a 2x2 matrix");
  const double a = S(0, 0);
  const double d = S(1, 1);
  const double b = 0.5 * (S(0, 1) + S(1, 0));
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

DeltaIssClf::DeltaIssClf(std::variant<LinearGainFamily, QuadraticFamily> family, int n,
                         ClassKFunction alpha_lower, ClassKFunction alpha_upper, ClassKFunction alpha,
                         ClassKFunction rho, ClassKFunction alpha_u, ClassKFunction rho_u)
    : family_(std::move(family)),
      n_(n),
      alpha_lower_(std::move(alpha_lower)),
      alpha_upper_(std::move(alpha_upper)),
      alpha_(std::move(alpha)),
      rho_(std::move(rho)),
      alpha_u_(std::move(alpha_u)),
      rho_u_(std::move(rho_u)) {}

DeltaIssClf DeltaIssClf::linear_gain(const SystemModel& sys, const Mat& K, std::optional<Mat> W) {
  const auto* lin = std::get_if<LinearDynamics>(&sys.dynamics());
  if (!lin) throw ContractViolation("linear-gain CLF needs linear dynamics");
  const int n = sys.state_dim();
  if (K.rows() != sys.input_dim() || K.cols() != n) throw ContractViolation("linear-gain CLF: K has the wrong shape");
  LinearGainFamily fam;
  fam.K = K;
  fam.W = W ? *W : Mat::Identity(n, n);
  if (fam.W.rows() != n || fam.W.cols() != n) throw ContractViolation("linear-gain CLF: W has the wrong shape");
  fam.A_cl = lin->A - lin->B * K;
  const double w_lo = sigma_min(fam.W);
  const double w_hi = sigma_max(fam.W);
  if (!(w_lo > 1e-12)) throw ContractViolation("linear-gain CLF: W is singular");
  fam.contraction = sigma_max(fam.W * fam.A_cl * fam.W.inverse());
  if (!(fam.contraction < 1.0)) {
    throw ContractViolation("linear-gain CLF: closed loop is not contracting in the W norm");
  }
  const double k_norm = sigma_max(K);
  if (!(k_norm > 0.0)) throw ContractViolation("linear-gain CLF: K must be nonzero");
  return DeltaIssClf(fam, n, ClassKFunction::linear(w_lo), ClassKFunction::linear(w_hi),
                     ClassKFunction::linear((1.0 - fam.contraction) * w_lo), ClassKFunction::linear(w_hi),
                     ClassKFunction::linear(k_norm), ClassKFunction::linear(1.0));
}

DeltaIssClf DeltaIssClf::quadratic(const Mat& P, const Mat& Q, const Mat& k_u, double rho_lin, double rho_quad) {
  const int n = static_cast<int>(P.rows());
  if (P.cols() != n || Q.rows() != n || Q.cols() != n || k_u.cols() != n) {
    throw ContractViolation("quadratic CLF: inconsistent matrix shapes");
  }
  const auto [p_lo, p_hi] = spectrum_bounds(P);
  const auto [q_lo, q_hi] = spectrum_bounds(Q);
  (void)q_hi;
  if (!(p_lo > 0.0) || !(q_lo > 0.0)) throw ContractViolation("quadratic CLF: P and Q must be positive definite");
  if (rho_lin < 0.0 || rho_quad < 0.0 || rho_lin + rho_quad == 0.0) {
    throw ContractViolation("quadratic CLF: rho coefficients must be nonnegative and not both zero");
  }
  std::vector<std::pair<double, double>> terms;
  if (rho_lin > 0.0) terms.emplace_back(rho_lin, 1.0);
  if (rho_quad > 0.0) terms.emplace_back(rho_quad, 2.0);
  QuadraticFamily fam{P, Q, k_u, rho_lin, rho_quad};
  return DeltaIssClf(fam, n, ClassKFunction::power(p_lo, 2.0), ClassKFunction::power(p_hi, 2.0),
                     ClassKFunction::power(q_lo, 2.0), ClassKFunction::polynomial(std::move(terms)),
                     ClassKFunction::linear(sigma_max(k_u)), ClassKFunction::linear(1.0));
}

double DeltaIssClf::value(const Vec& x, const Vec& y) const {
  if (x.size() != n_ || y.size() != n_) throw ContractViolation("clf_value: dimension mismatch");
  const Vec e = x - y;
  if (const auto* lin = std::get_if<LinearGainFamily>(&family_)) return (lin->W * e).norm();
  const auto& q = std::get<QuadraticFamily>(family_);
  return std::max(0.0, e.dot(q.P * e));
}

Vec DeltaIssClf::feedback(const Vec& x, const Vec& y, const Vec& u) const {
  if (x.size() != n_ || y.size() != n_) throw ContractViolation("clf_feedback: dimension mismatch");
  const Mat& gain = std::holds_alternative<LinearGainFamily>(family_) ? std::get<LinearGainFamily>(family_).K
                                                                      : std::get<QuadraticFamily>(family_).k_u;
  if (u.size() != gain.rows()) throw ContractViolation("clf_feedback: control dimension mismatch");
  return u - gain * (x - y);
}

std::string DeltaIssClf::family_name() const {
  return std::holds_alternative<LinearGainFamily>(family_) ? "linear-gain" : "quadratic";
}

double clf_value(const DeltaIssClf& clf, const Vec& x, const Vec& y) { return clf.value(x, y); }

Vec clf_feedback(const DeltaIssClf& clf, const Vec& x, const Vec& y, const Vec& u) {
  return clf.feedback(x, y, u);
}

VerificationReport verify_clf_on_grid(const DeltaIssClf& clf, const SystemModel& sys, int grid_density) {
  GridOptions opts;
  opts.density = grid_density;
  return verify_clf_on_grid(clf, sys, opts);
}

VerificationReport verify_clf_on_grid(const DeltaIssClf& clf, const SystemModel& sys, const GridOptions& opts) {
  if (opts.density < 2) throw ContractViolation("verify_clf_on_grid: density must be at least 2");
  if (clf.state_dim() != sys.state_dim()) throw ContractViolation("verify_clf_on_grid: dimension mismatch");

  VerificationReport report;
  report.sandwich.name = "sandwich";
  report.decrease.name = "decrease";
  report.input.name = "input-bound";

  const std::vector<Vec> pts = grid_points(sys, opts.density);
  const std::vector<Vec> us = input_samples(sys);
  const std::vector<Vec> ws = disturbance_samples(sys);
  report.grid_points = pts.size();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n_pts = pts.size();
  if (n_pts * n_pts <= opts.max_pairs) {
    pairs.reserve(n_pts * n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) {
      for (std::size_t j = 0; j < n_pts; ++j) pairs.emplace_back(i, j);
    }
  } else if (n_pts > 0) {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_int_distribution<std::size_t> pick(0, n_pts - 1);
    pairs.reserve(opts.max_pairs);
    for (std::size_t t = 0; t < opts.max_pairs; ++t) pairs.emplace_back(pick(rng), pick(rng));
  }
  report.pairs = pairs.size();

  const double tol = opts.tolerance;
  ViolatingTuple tuple;
  for (const auto& [i, j] : pairs) {
    const Vec& x = pts[i];
    const Vec& y = pts[j];
    const double dist = (x - y).norm();
    const double v = clf.value(x, y);
    const double scale = 1.0 + std::abs(v);
    tuple.x = x;
    tuple.y = y;
    tuple.u = us.front();
    tuple.w1 = ws.front();
    tuple.w2 = ws.front();
    record(report.sandwich, std::min(v - clf.alpha_lower()(dist), clf.alpha_upper()(dist) - v), tol * scale, tuple);

    for (const Vec& u : us) {
      const Vec kappa = clf.feedback(x, y, u);
      tuple.u = u;
      record(report.input, clf.alpha_u()(dist) + clf.rho_u()(u.norm()) - kappa.norm(), tol * (1.0 + kappa.norm()),
             tuple);
      for (const Vec& w1 : ws) {
        const Vec xp = sys.step(x, kappa, w1);
        for (const Vec& w2 : ws) {
          const Vec yp = sys.step(y, u, w2);
          const double lhs = clf.value(xp, yp) - v;
          const double rhs = -clf.alpha()(dist) + clf.rho()((w1 - w2).norm());
          tuple.w1 = w1;
          tuple.w2 = w2;
          record(report.decrease, rhs - lhs, tol * scale, tuple);
        }
      }
    }
  }
  return report;
}

}  // namespace reachsched
