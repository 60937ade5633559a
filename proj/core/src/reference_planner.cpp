#include "reachsched/reference_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "reachsched/errors.hpp"

namespace reachsched {
namespace {

struct TreeNode {
  Vec state;
  Vec control;  // control that produced this node from its parent
  int parent = -1;
};

Vec sample_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec d(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) d(i) = gauss(rng);
    norm = d.norm();
  } while (norm == 0.0);
  return d / norm * (radius * std::pow(unif(rng), 1.0 / dim));
}

Vec sample_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
  return x;
}

}  // namespace

ReferenceTrajectory plan_rrt(const SystemModel& sys, double margin, const RrtParams& params, std::uint64_t seed) {
  if (margin < 0.0) throw ContractViolation("plan_rrt: margin must be nonnegative");
  if (params.control_samples < 1 || params.max_iterations < 1) throw ContractViolation("plan_rrt: empty budget");
  const FreeSpaceRegion& X = sys.free_space();
  const Vec start = chebyshev_center(sys.initial_set());
  if (signed_distance(X, start) < margin) {
    throw ContractViolation("plan_rrt: Chebyshev center of X_I violates the margin");
  }

  const int n = sys.state_dim();
  Vec weights = Vec::Constant(n, params.velocity_weight);
  weights(X.plane()[0]) = 1.0;
  weights(X.plane()[1]) = 1.0;
  auto distance = [&](const Vec& a, const Vec& b) { return (weights.array() * (a - b).array()).matrix().norm(); };

  const auto [x_lo, x_hi] = X.bounding_box();
  const auto [f_lo, f_hi] = sys.target_set().bounding_box();
  const HPolytope& target = sys.target_set();
  const Vec w0 = sys.zero_disturbance();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<TreeNode> tree;
  tree.push_back({start, Vec(), -1});
  double best_gap = -target.depth(start);

  auto finish = [&](int leaf) {
    ReferenceTrajectory ref;
    ref.margin = margin;
    ref.seed = seed;
    for (int i = leaf; i >= 0; i = tree[i].parent) {
      ref.states.push_back(tree[i].state);
      if (tree[i].parent >= 0) ref.controls.push_back(tree[i].control);
    }
    std::reverse(ref.states.begin(), ref.states.end());
    std::reverse(ref.controls.begin(), ref.controls.end());
    return ref;
  };

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const Vec sample = unif(rng) < params.goal_bias ? sample_box(rng, f_lo, f_hi) : sample_box(rng, x_lo, x_hi);

    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const double d = distance(tree[i].state, sample);
      if (d < best) {
        best = d;
        nearest = static_cast<int>(i);
      }
    }

    std::optional<TreeNode> child;
    double child_dist = std::numeric_limits<double>::infinity();
    for (int s = 0; s < params.control_samples; ++s) {
      const Vec u = sample_ball(rng, sys.input_dim(), params.control_scale * sys.u_max());
      const Vec next = sys.step(tree[nearest].state, u, w0);
      const double sd = signed_distance(X, next);
      if (sd < margin || sd <= 0.0) continue;
      const double d = distance(next, sample);
      if (d < child_dist) {
        child_dist = d;
        child = TreeNode{next, u, nearest};
      }
    }
    if (!child) continue;
    tree.push_back(*child);
    const double depth = target.depth(child->state);
    best_gap = std::min(best_gap, params.goal_margin - depth);
    if (depth >= params.goal_margin && target.contains(child->state, 0.0)) {
      return finish(static_cast<int>(tree.size()) - 1);
    }
  }
  throw PlanningFailure("plan_rrt: iteration budget exhausted", tree.size(), std::max(0.0, best_gap));
}

ValidationReport validate_reference(const SystemModel& sys, const ReferenceTrajectory& ref) {
  ValidationReport rep;
  if (ref.states.size() != ref.controls.size() + 1) {
    rep.dynamics_ok = false;
    rep.first_dynamics_violation = 0;
    return rep;
  }
  const Vec center = chebyshev_center(sys.initial_set());
  rep.start_ok = (ref.states.front() - center).norm() <= 1e-9 * (1.0 + center.norm());
  const Vec w0 = sys.zero_disturbance();
  for (int k = 0; k < ref.horizon(); ++k) {
    const Vec next = sys.step(ref.states[k], ref.controls[k], w0);
    if (rep.dynamics_ok && (next - ref.states[k + 1]).norm() > 1e-9) {
      rep.dynamics_ok = false;
      rep.first_dynamics_violation = k;
    }
    if (rep.controls_ok && ref.controls[k].norm() > sys.u_max() * (1.0 + 1e-12)) {
      rep.controls_ok = false;
      rep.first_control_violation = k;
    }
  }
  for (std::size_t k = 0; k < ref.states.size(); ++k) {
    const double sd = signed_distance(sys.free_space(), ref.states[k]);
    if (sd < ref.margin || sd <= 0.0) {
      rep.margin_ok = false;
      rep.first_margin_violation = static_cast<int>(k);
      break;
    }
  }
  rep.terminal_ok = sys.target_set().contains(ref.states.back(), 0.0);
  return rep;
}

}  // namespace reachsched
