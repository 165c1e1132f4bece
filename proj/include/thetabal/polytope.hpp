#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "thetabal/rational.hpp"

namespace thetabal::polytope {

using IndexSet = std::vector<std::size_t>;

/// Affine chart of the affine hull of a finite point set: origin + span of a
/// basis chosen among the point differences.
class AffineFrame {
 public:
  explicit AffineFrame(std::span<const RatVec> points);

  int dimension() const { return static_cast<int>(basis_.size()); }
  const RatVec& origin() const { return origin_; }
  const std::vector<RatVec>& basis() const { return basis_; }

  /// Coordinates of y in the chart, or nullopt when y is off the affine hull.
  std::optional<RatVec> coordinates(const RatVec& y) const;

 private:
  RatVec origin_;
  std::vector<RatVec> basis_;
  std::vector<std::size_t> pivots_;
};

/// Supporting hyperplane of a facet in the local chart: normal . c <= offset on
/// the polytope, with equality exactly on `vertices`.
struct Facet {
  IndexSet vertices;
  RatVec normal;
  Rational offset;
};

int affine_dimension(std::span<const RatVec> points);

/// Facets of conv(points) relative to its affine hull. Empty for a single point.
std::vector<Facet> facets(std::span<const RatVec> points);

/// Indices of the extreme points (vertices) of conv(points), ascending.
IndexSet extreme_points(std::span<const RatVec> points);

/// Every nonempty face of conv(points), as sorted index sets of the input
/// points lying on it; includes the polytope itself.
std::vector<IndexSet> faces(std::span<const RatVec> points);

/// Triangulation of conv(points) into simplices of full (relative) dimension,
/// by pulling from the first point.
std::vector<IndexSet> triangulate(std::span<const RatVec> points);

/// Exact Euclidean volume of conv(points); zero if not full-dimensional.
Rational volume(std::span<const RatVec> points);

/// Closed containment test.
bool contains(std::span<const RatVec> points, const RatVec& y);

}  // namespace thetabal::polytope
