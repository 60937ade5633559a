#include "reachsched/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "reachsched/errors.hpp"
#include "reachsched/linprog.hpp"

namespace reachsched {
namespace {

constexpr double kVertexTol = 1e-9;

std::vector<bool> find_equality_rows(const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.rows());
  std::vector<bool> eq(m, false);
  for (int i = 0; i < m; ++i) {
    const double ni = A.row(i).norm();
    for (int j = i + 1; j < m; ++j) {
      const double nj = A.row(j).norm();
      if (ni == 0.0 || nj == 0.0) continue;
      if ((A.row(i) / ni + A.row(j) / nj).norm() < 1e-12 &&
          std::abs(b(i) / ni + b(j) / nj) < 1e-12) {
        eq[i] = eq[j] = true;
      }
    }
  }
  return eq;
}

// Brute-force vertex enumeration: every n-subset of rows with a nonsingular
// system whose solution satisfies all rows.
std::vector<Vec> enumerate_vertices(const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  std::vector<Vec> out;
  if (m < n) return out;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Mat S(n, n);
    Vec r(n);
    for (int k = 0; k < n; ++k) {
      S.row(k) = A.row(idx[k]);
      r(k) = b(idx[k]);
    }
    Eigen::FullPivLU<Mat> lu(S);
    if (lu.rank() == n) {
      Vec v = lu.solve(r);
      const bool feasible = ((A * v - b).array() <= kVertexTol * (1.0 + b.cwiseAbs().array())).all();
      if (feasible) {
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const Vec& w) { return (w - v).norm() < 1e-9; });
        if (!dup) out.push_back(v);
      }
    }
    int k = n - 1;
    while (k >= 0 && idx[k] == m - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

void check_dims(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& w) {
  if (x.size() != sys.state_dim() || u.size() != sys.input_dim() ||
      w.size() != sys.disturbance_dim()) {
    throw ContractViolation("step: dimension mismatch (x " + std::to_string(x.size()) + ", u " +
                            std::to_string(u.size()) + ", w " + std::to_string(w.size()) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------- HPolytope

HPolytope::HPolytope(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size() || A_.cols() == 0) {
    throw ContractViolation("HPolytope: A and b have inconsistent shapes");
  }
  if (!A_.allFinite() || !b_.allFinite()) throw ContractViolation("HPolytope: non-finite data");
  equality_rows_ = find_equality_rows(A_, b_);
  // Boundedness and nonemptiness: each coordinate must have finite extent.
  for (int j = 0; j < dim(); ++j) {
    for (double sign : {1.0, -1.0}) {
      Vec c = Vec::Zero(dim());
      c(j) = sign;
      maximize_lp(c, A_, b_);  // throws on empty or unbounded
    }
  }
  vertices_ = enumerate_vertices(A_, b_);
  if (vertices_.empty()) throw InfeasibleError("HPolytope: no vertices found");
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(lo.size());
  if (hi.size() != n) throw ContractViolation("HPolytope::box: bound sizes differ");
  Mat A = Mat::Zero(2 * n, n);
  Vec b(2 * n);
  for (int i = 0; i < n; ++i) {
    if (lo(i) > hi(i)) throw ContractViolation("HPolytope::box: lo > hi");
    A(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    A(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return HPolytope(std::move(A), std::move(b));
}

bool HPolytope::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) throw ContractViolation("HPolytope::contains: dimension mismatch");
  return ((A_ * x - b_).array() <= tol).all();
}

double HPolytope::depth(const Vec& x) const {
  if (x.size() != dim()) throw ContractViolation("HPolytope::depth: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const double norm = A_.row(i).norm();
    if (norm == 0.0) continue;
    best = std::min(best, (b_(i) - A_.row(i).dot(x)) / norm);
  }
  return best;
}

std::pair<Vec, Vec> HPolytope::bounding_box() const {
  Vec lo = vertices_.front();
  Vec hi = vertices_.front();
  for (const Vec& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

// ---------------------------------------------------------- FreeSpaceRegion

FreeSpaceRegion::FreeSpaceRegion(int dim, geometry::Polygon outer,
                                 std::vector<geometry::Polygon> obstacles,
                                 std::vector<BoxBound> box, std::vector<HalfSpace> halfspaces,
                                 std::array<int, 2> plane)
    : dim_(dim),
      outer_(std::move(outer)),
      obstacles_(std::move(obstacles)),
      box_(std::move(box)),
      halfspaces_(std::move(halfspaces)),
      plane_(plane) {
  if (dim_ < 2 || plane_[0] == plane_[1] || plane_[0] < 0 || plane_[1] < 0 || plane_[0] >= dim_ ||
      plane_[1] >= dim_) {
    throw ContractViolation("FreeSpaceRegion: invalid polygon plane");
  }
  if (!geometry::is_simple(outer_)) throw ContractViolation("FreeSpaceRegion: outer loop is not simple");
  for (const auto& obs : obstacles_) {
    if (!geometry::is_simple(obs)) throw ContractViolation("FreeSpaceRegion: obstacle loop is not simple");
    for (const auto& v : obs) {
      if (!geometry::contains(outer_, v) || geometry::boundary_distance(outer_, v) == 0.0) {
        throw ContractViolation("FreeSpaceRegion: obstacle vertex outside the outer loop");
      }
    }
  }
  for (const auto& bb : box_) {
    if (bb.coord < 0 || bb.coord >= dim_ || bb.coord == plane_[0] || bb.coord == plane_[1] ||
        !(bb.lo < bb.hi)) {
      throw ContractViolation("FreeSpaceRegion: invalid box bound");
    }
  }
  for (const auto& hs : halfspaces_) {
    if (hs.a.size() != dim_ || hs.a.norm() == 0.0) {
      throw ContractViolation("FreeSpaceRegion: invalid half-space");
    }
  }
}

bool FreeSpaceRegion::contains(const Vec& x) const { return signed_distance(*this, x) > 0.0; }

std::pair<Vec, Vec> FreeSpaceRegion::bounding_box() const {
  Vec lo = Vec::Constant(dim_, -1.0);
  Vec hi = Vec::Constant(dim_, 1.0);
  for (int k = 0; k < 2; ++k) {
    lo(plane_[k]) = std::numeric_limits<double>::infinity();
    hi(plane_[k]) = -std::numeric_limits<double>::infinity();
  }
  for (const auto& v : outer_) {
    for (int k = 0; k < 2; ++k) {
      lo(plane_[k]) = std::min(lo(plane_[k]), v(k));
      hi(plane_[k]) = std::max(hi(plane_[k]), v(k));
    }
  }
  for (const auto& bb : box_) {
    lo(bb.coord) = bb.lo;
    hi(bb.coord) = bb.hi;
  }
  return {lo, hi};
}

double signed_distance(const FreeSpaceRegion& region, const Vec& x) {
  if (x.size() != region.dim()) throw ContractViolation("signed_distance: dimension mismatch");
  const geometry::Point2 p = region.project(x);
  bool member = geometry::contains(region.outer(), p);
  double dist = geometry::boundary_distance(region.outer(), p);
  for (const auto& obs : region.obstacles()) {
    if (geometry::contains(obs, p)) member = false;
    dist = std::min(dist, geometry::boundary_distance(obs, p));
  }
  for (const auto& bb : region.box()) {
    const double v = x(bb.coord);
    if (!(v > bb.lo && v < bb.hi)) member = false;
    dist = std::min(dist, std::min(std::abs(v - bb.lo), std::abs(bb.hi - v)));
  }
  for (const auto& hs : region.halfspaces()) {
    const double slack = (hs.b - hs.a.dot(x)) / hs.a.norm();
    if (!(slack > 0.0)) member = false;
    dist = std::min(dist, std::abs(slack));
  }
  if (dist == 0.0) return 0.0;
  return member ? dist : -dist;
}

// -------------------------------------------------------------- SystemModel

SystemModel::SystemModel(Dynamics dynamics, double lipschitz_x, double lipschitz_w,
                         NormBall input_set, NormBall disturbance_set, FreeSpaceRegion free_space,
                         HPolytope initial_set, HPolytope target_set)
    : dynamics_(std::move(dynamics)),
      lipschitz_x_(lipschitz_x),
      lipschitz_w_(lipschitz_w),
      input_set_(input_set),
      disturbance_set_(disturbance_set),
      free_space_(std::move(free_space)),
      initial_set_(std::move(initial_set)),
      target_set_(std::move(target_set)) {
  if (const auto* lin = std::get_if<LinearDynamics>(&dynamics_)) {
    if (lin->A.rows() != lin->A.cols() || lin->B.rows() != lin->A.rows()) {
      throw ContractViolation("SystemModel: inconsistent linear dynamics shapes");
    }
    n_ = static_cast<int>(lin->A.rows());
    m_ = static_cast<int>(lin->B.cols());
    nw_ = n_;
  } else {
    n_ = 2;
    m_ = 1;
    nw_ = 1;
  }
  if (!(lipschitz_x_ > 0.0) || !(lipschitz_w_ > 0.0)) {
    throw ContractViolation("SystemModel: Lipschitz constants must be positive");
  }
  if (input_set_.radius < 0.0 || disturbance_set_.radius < 0.0) {
    throw ContractViolation("SystemModel: negative set radius");
  }
  if (free_space_.dim() != n_ || initial_set_.dim() != n_ || target_set_.dim() != n_) {
    throw ContractViolation("SystemModel: set dimensions do not match the state dimension");
  }

  // X_I, X_F inside X: vertices plus points along vertex-to-vertex segments.
  for (const HPolytope* set : {&initial_set_, &target_set_}) {
    const auto& verts = set->vertices();
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (!free_space_.contains(verts[i])) {
        throw ContractViolation("SystemModel: initial/target vertex outside the free space");
      }
      for (std::size_t j = i + 1; j < verts.size(); ++j) {
        const double len = (verts[j] - verts[i]).norm();
        const int steps = static_cast<int>(std::ceil(len / 1e-2));
        for (int s = 1; s < steps; ++s) {
          const Vec p = verts[i] + (verts[j] - verts[i]) * (static_cast<double>(s) / steps);
          if (!free_space_.contains(p)) {
            throw ContractViolation("SystemModel: initial/target set leaves the free space");
          }
        }
      }
    }
  }
  for (const Vec& v : initial_set_.vertices()) {
    if (target_set_.contains(v, 0.0)) throw ContractViolation("SystemModel: X_I and X_F overlap");
  }
  for (const Vec& v : target_set_.vertices()) {
    if (initial_set_.contains(v, 0.0)) throw ContractViolation("SystemModel: X_I and X_F overlap");
  }
}

Vec SystemModel::step(const Vec& x, const Vec& u, const Vec& w) const {
  check_dims(*this, x, u, w);
  if (const auto* lin = std::get_if<LinearDynamics>(&dynamics_)) {
    return lin->A * x + lin->B * u + w;
  }
  const auto& p = std::get<PendulumDynamics>(dynamics_);
  Vec next(2);
  next(0) = x(0) + p.dt * (x(1) + w(0));
  next(1) = x(1) + p.dt * (p.a * std::sin(x(0)) - p.b * x(1) + u(0));
  return next;
}

SystemModel SystemModel::with_sets(HPolytope initial_set, HPolytope target_set) const {
  return SystemModel(dynamics_, lipschitz_x_, lipschitz_w_, input_set_, disturbance_set_,
                     free_space_, std::move(initial_set), std::move(target_set));
}

SystemModel SystemModel::with_w_max(double w_max) const {
  return SystemModel(dynamics_, lipschitz_x_, lipschitz_w_, input_set_, NormBall{w_max},
                     free_space_, initial_set_, target_set_);
}

Vec step(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& w) {
  return sys.step(x, u, w);
}

// ------------------------------------------------------------ discretisation

Mat matrix_exponential(const Mat& M) {
  if (M.rows() != M.cols()) throw ContractViolation("matrix_exponential: non-square matrix");
  const int n = static_cast<int>(M.rows());
  const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat S = M / std::ldexp(1.0, squarings);

  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * S / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-12 * 1e-4 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

DiscreteLinear discretize_zoh(const Mat& A_c, const Mat& B_c, double dt) {
  if (A_c.rows() != A_c.cols()) throw ContractViolation("discretize_zoh: A_c must be square");
  if (B_c.rows() != A_c.rows()) throw ContractViolation("discretize_zoh: B_c row count mismatch");
  if (!(dt > 0.0)) throw ContractViolation("discretize_zoh: dt must be positive");
  const Eigen::Index n = A_c.rows();
  const Eigen::Index m = B_c.cols();
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A_c * dt;
  aug.topRightCorner(n, m) = B_c * dt;
  const Mat E = matrix_exponential(aug);
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

// ---------------------------------------------------------- Chebyshev center

ChebyshevBall chebyshev_ball(const Mat& A, const Vec& b) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const auto eq = find_equality_rows(A, b);
  Mat lpA(m, n + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    lpA.row(i).head(n) = A.row(i);
    lpA(i, n) = eq[static_cast<std::size_t>(i)] ? 0.0 : A.row(i).norm();
  }
  Vec c = Vec::Zero(n + 1);
  c(n) = 1.0;
  const LpSolution sol = maximize_lp(c, lpA, b);
  if (sol.x(n) < -1e-9) throw InfeasibleError("chebyshev_center: empty polytope");
  return {sol.x.head(n), std::max(0.0, sol.x(n))};
}

ChebyshevBall chebyshev_ball(const HPolytope& p) { return chebyshev_ball(p.A(), p.b()); }

Vec chebyshev_center(const HPolytope& p) { return chebyshev_ball(p).center; }

}  // namespace reachsched
