#pragma once

#include <vector>

#include <Eigen/Dense>

namespace reachsched::geometry {

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;  // closed vertex loop, last edge implicit

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Distance from p to the nearest edge of the loop.
double boundary_distance(const Polygon& poly, const Point2& p);

/// Even-odd crossing test. Points on an edge are reported as outside
/// only when `boundary_distance` is exactly zero; callers that need strict
/// interiors should combine both.
bool contains(const Polygon& poly, const Point2& p);

/// No two non-adjacent edges intersect and no edge is degenerate.
bool is_simple(const Polygon& poly);

double signed_area(const Polygon& poly);

}  // namespace reachsched::geometry
