#pragma once

#include <array>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "reachsched/geometry.hpp"

namespace reachsched {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Euclidean ball {v : ||v|| <= radius} centred at the origin. Houses U and W.
struct NormBall {
  double radius = 0.0;

  bool contains(const Vec& v, double tol = 0.0) const { return v.norm() <= radius + tol; }
};

/// Bounded polytope {x : A x <= b} with a cached vertex list.
///
/// Lower-dimensional sets are allowed when they are expressed through pairs
/// of opposite rows (a' x <= b, -a' x <= -b); the vehicle initial set with
/// zero velocity is one such set.
class HPolytope {
 public:
  HPolytope(Mat A, Vec b);

  static HPolytope box(const Vec& lo, const Vec& hi);

  int dim() const { return static_cast<int>(A_.cols()); }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const std::vector<Vec>& vertices() const { return vertices_; }

  bool contains(const Vec& x, double tol = 1e-9) const;

  /// min_i (b_i - a_i x) / ||a_i||: distance to the nearest facet hyperplane,
  /// negative outside.
  double depth(const Vec& x) const;

  /// Axis-aligned bounds of the vertex set.
  std::pair<Vec, Vec> bounding_box() const;

  /// Row indices that belong to an opposite pair describing an equality.
  const std::vector<bool>& equality_rows() const { return equality_rows_; }

 private:
  Mat A_;
  Vec b_;
  std::vector<Vec> vertices_;
  std::vector<bool> equality_rows_;
};

/// Box bound lo <= x[coord] <= hi on a coordinate outside the polygon plane.
struct BoxBound {
  int coord = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Half-space a' x <= b over the full state.
struct HalfSpace {
  Vec a;
  double b = 0.0;
};

/// Polygon-with-holes in a 2-D coordinate plane, times box and half-space
/// constraints on the full state. Membership is strict: boundary points are
/// outside.
class FreeSpaceRegion {
 public:
  FreeSpaceRegion(int dim, geometry::Polygon outer, std::vector<geometry::Polygon> obstacles,
                  std::vector<BoxBound> box = {}, std::vector<HalfSpace> halfspaces = {},
                  std::array<int, 2> plane = {0, 1});

  int dim() const { return dim_; }
  const geometry::Polygon& outer() const { return outer_; }
  const std::vector<geometry::Polygon>& obstacles() const { return obstacles_; }
  const std::vector<BoxBound>& box() const { return box_; }
  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  std::array<int, 2> plane() const { return plane_; }

  bool contains(const Vec& x) const;

  /// Sampling bounds: bounding box of the outer loop in the plane and the box
  /// bounds elsewhere. Coordinates without bounds get [-1, 1].
  std::pair<Vec, Vec> bounding_box() const;

  geometry::Point2 project(const Vec& x) const { return {x(plane_[0]), x(plane_[1])}; }

 private:
  int dim_;
  geometry::Polygon outer_;
  std::vector<geometry::Polygon> obstacles_;
  std::vector<BoxBound> box_;
  std::vector<HalfSpace> halfspaces_;
  std::array<int, 2> plane_;
};

/// Positive distance to the nearest boundary piece for members, negative of
/// that distance otherwise (zero on the boundary).
double signed_distance(const FreeSpaceRegion& region, const Vec& x);

/// x+ = A x + B u + w.
struct LinearDynamics {
  Mat A;
  Mat B;
};

/// Forward-Euler inverted pendulum:
///   x1+ = x1 + dt (x2 + w),  x2+ = x2 + dt (a sin x1 - b x2 + u).
struct PendulumDynamics {
  double a = 0.6;
  double b = 3.0;
  double dt = 0.2;
};

using Dynamics = std::variant<LinearDynamics, PendulumDynamics>;

class SystemModel {
 public:
  SystemModel(Dynamics dynamics, double lipschitz_x, double lipschitz_w, NormBall input_set,
              NormBall disturbance_set, FreeSpaceRegion free_space, HPolytope initial_set,
              HPolytope target_set);

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  int disturbance_dim() const { return nw_; }

  const Dynamics& dynamics() const { return dynamics_; }
  double lipschitz_x() const { return lipschitz_x_; }
  double lipschitz_w() const { return lipschitz_w_; }
  const NormBall& input_set() const { return input_set_; }
  const NormBall& disturbance_set() const { return disturbance_set_; }
  double u_max() const { return input_set_.radius; }
  double w_max() const { return disturbance_set_.radius; }
  const FreeSpaceRegion& free_space() const { return free_space_; }
  const HPolytope& initial_set() const { return initial_set_; }
  const HPolytope& target_set() const { return target_set_; }

  Vec step(const Vec& x, const Vec& u, const Vec& w) const;
  Vec zero_disturbance() const { return Vec::Zero(nw_); }

  /// Same plant and free space with different initial/target sets.
  SystemModel with_sets(HPolytope initial_set, HPolytope target_set) const;
  /// Same model with another disturbance bound.
  SystemModel with_w_max(double w_max) const;

 private:
  Dynamics dynamics_;
  int n_ = 0;
  int m_ = 0;
  int nw_ = 0;
  double lipschitz_x_;
  double lipschitz_w_;
  NormBall input_set_;
  NormBall disturbance_set_;
  FreeSpaceRegion free_space_;
  HPolytope initial_set_;
  HPolytope target_set_;
};

Vec step(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& w);

struct DiscreteLinear {
  Mat A;
  Mat B;
};

/// Exact zero-order-hold discretisation via the augmented matrix exponential,
/// evaluated by scaling-and-squaring of a truncated Taylor series.
DiscreteLinear discretize_zoh(const Mat& A_c, const Mat& B_c, double dt);

/// exp(M) by scaling-and-squaring; exposed for tests.
Mat matrix_exponential(const Mat& M);

struct ChebyshevBall {
  Vec center;
  double radius = 0.0;
};

/// Largest inscribed ball, measured inside the affine hull for polytopes with
/// equality pairs. Throws InfeasibleError for empty polytopes.
ChebyshevBall chebyshev_ball(const HPolytope& p);
ChebyshevBall chebyshev_ball(const Mat& A, const Vec& b);
Vec chebyshev_center(const HPolytope& p);

}  // namespace reachsched
