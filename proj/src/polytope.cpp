#include "thetabal/polytope.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace thetabal::polytope {
namespace {

RatVec sub(const RatVec& a, const RatVec& b) {
  RatVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// Reduces v against an echelon basis; returns true if v stays nonzero and
// appends it (reduced) to the echelon.
bool insert_echelon(std::vector<RatVec>& echelon, std::vector<std::size_t>& pivots, RatVec v) {
  for (std::size_t r = 0; r < echelon.size(); ++r) {
    const std::size_t p = pivots[r];
    if (sgn(v[p]) == 0) continue;
    const Rational f = v[p] / echelon[r][p];
    for (std::size_t c = 0; c < v.size(); ++c) v[c] -= f * echelon[r][c];
  }
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (sgn(v[c]) != 0) {
      echelon.push_back(std::move(v));
      pivots.push_back(c);
      return true;
    }
  }
  return false;
}

// Visits all size-r combinations of {0..n-1} in lexicographic order.
void for_each_combination(std::size_t n, std::size_t r, const std::function<void(const IndexSet&)>& f) {
  if (r > n) return;
  IndexSet idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    f(idx);
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<RatVec> local_points(std::span<const RatVec> points, const AffineFrame& frame) {
  std::vector<RatVec> local;
  local.reserve(points.size());
  for (const auto& p : points) local.push_back(*frame.coordinates(p));
  return local;
}

std::vector<RatVec> subset(std::span<const RatVec> points, const IndexSet& idx) {
  std::vector<RatVec> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

// Facets of a full-dimensional point set in Q^d.
std::vector<Facet> facets_full(const std::vector<RatVec>& pts, int d) {
  std::vector<Facet> out;
  if (d == 0) return out;
  std::set<IndexSet> seen;
  const std::size_t np = pts.size();
  for_each_combination(np, static_cast<std::size_t>(d), [&](const IndexSet& idx) {
    // Rows u_j = p_{idx[j]} - p_{idx[0]}; normal by cofactor expansion.
    RatMat u;
    for (std::size_t j = 1; j < idx.size(); ++j) u.push_back(sub(pts[idx[j]], pts[idx[0]]));
    if (rank(u) != d - 1) return;
    RatVec normal(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
      RatMat minor;
      for (const auto& row : u) {
        RatVec r;
        for (int cc = 0; cc < d; ++cc)
          if (cc != c) r.push_back(row[static_cast<std::size_t>(cc)]);
        minor.push_back(std::move(r));
      }
      const Rational det = determinant(std::move(minor));
      normal[static_cast<std::size_t>(c)] = (c % 2 == 0) ? det : Rational(-det);
    }
    Rational offset = dot(normal, pts[idx[0]]);
    int pos = 0, neg = 0;
    IndexSet on;
    for (std::size_t i = 0; i < np; ++i) {
      const int s = sgn(dot(normal, pts[i]) - offset);
      if (s > 0) ++pos;
      else if (s < 0) ++neg;
      else on.push_back(i);
      if (pos > 0 && neg > 0) return;
    }
    if (pos > 0) {
      for (auto& a : normal) a = -a;
      offset = -offset;
    }
    if (!seen.insert(on).second) return;
    out.push_back(Facet{std::move(on), std::move(normal), std::move(offset)});
  });
  return out;
}

}  // namespace

AffineFrame::AffineFrame(std::span<const RatVec> points) {
  if (points.empty()) throw std::invalid_argument("AffineFrame: empty point set");
  origin_ = points.front();
  std::vector<RatVec> echelon;
  for (std::size_t i = 1; i < points.size(); ++i) {
    RatVec d = sub(points[i], origin_);
    if (insert_echelon(echelon, pivots_, d)) basis_.push_back(std::move(d));
  }
}

std::optional<RatVec> AffineFrame::coordinates(const RatVec& y) const {
  const std::size_t n = origin_.size();
  const std::size_t d = basis_.size();
  if (y.size() != n) return std::nullopt;
  // Augmented system [B | y - origin], rows indexed by ambient coordinate.
  RatMat a(n, RatVec(d + 1));
  const RatVec rhs = sub(y, origin_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) a[i][j] = basis_[j][i];
    a[i][d] = rhs[i];
  }
  std::size_t row = 0;
  std::vector<std::size_t> pivot_row(d);
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = row;
    while (piv < n && sgn(a[piv][col]) == 0) ++piv;
    if (piv == n) throw std::logic_error("AffineFrame: dependent basis");
    std::swap(a[piv], a[row]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == row || sgn(a[r][col]) == 0) continue;
      const Rational f = a[r][col] / a[row][col];
      for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[row][c];
    }
    pivot_row[col] = row;
    ++row;
  }
  for (std::size_t r = row; r < n; ++r)
    if (sgn(a[r][d]) != 0) return std::nullopt;
  RatVec c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = a[pivot_row[j]][d] / a[pivot_row[j]][j];
  return c;
}

int affine_dimension(std::span<const RatVec> points) {
  if (points.empty()) return -1;
  return AffineFrame(points).dimension();
}

std::vector<Facet> facets(std::span<const RatVec> points) {
  const AffineFrame frame(points);
  return facets_full(local_points(points, frame), frame.dimension());
}

IndexSet extreme_points(std::span<const RatVec> points) {
  if (points.empty()) return {};
  const AffineFrame frame(points);
  if (frame.dimension() == 0) return {0};
  std::set<std::size_t> out;
  for (const auto& f : facets_full(local_points(points, frame), frame.dimension())) {
    const auto sub_pts = subset(points, f.vertices);
    for (auto i : extreme_points(sub_pts)) out.insert(f.vertices[i]);
  }
  return IndexSet(out.begin(), out.end());
}

std::vector<IndexSet> faces(std::span<const RatVec> points) {
  std::set<IndexSet> out;
  IndexSet all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const AffineFrame frame(points);
  if (frame.dimension() == 0) {
    out.insert(all);
  } else {
    out.insert(all);
    for (const auto& f : facets_full(local_points(points, frame), frame.dimension())) {
      const auto sub_pts = subset(points, f.vertices);
      for (const auto& face : faces(sub_pts)) {
        IndexSet mapped;
        for (auto i : face) mapped.push_back(f.vertices[i]);
        std::sort(mapped.begin(), mapped.end());
        out.insert(std::move(mapped));
      }
    }
  }
  return std::vector<IndexSet>(out.begin(), out.end());
}

std::vector<IndexSet> triangulate(std::span<const RatVec> points) {
  if (points.empty()) return {};
  const AffineFrame frame(points);
  if (frame.dimension() == 0) return {IndexSet{0}};
  std::vector<IndexSet> out;
  const std::size_t apex = 0;
  for (const auto& f : facets_full(local_points(points, frame), frame.dimension())) {
    if (std::find(f.vertices.begin(), f.vertices.end(), apex) != f.vertices.end()) continue;
    const auto sub_pts = subset(points, f.vertices);
    for (const auto& simplex : triangulate(sub_pts)) {
      IndexSet s{apex};
      for (auto i : simplex) s.push_back(f.vertices[i]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

Rational volume(std::span<const RatVec> points) {
  if (points.empty()) return 0;
  const std::size_t n = points.front().size();
  if (affine_dimension(points) != static_cast<int>(n)) return 0;
  Rational total = 0;
  for (const auto& s : triangulate(points)) {
    RatMat m;
    for (std::size_t j = 1; j < s.size(); ++j) m.push_back(sub(points[s[j]], points[s[0]]));
    total += abs(determinant(std::move(m)));
  }
  Rational fact = 1;
  for (std::size_t i = 2; i <= n; ++i) fact *= static_cast<long>(i);
  return total / fact;
}

bool contains(std::span<const RatVec> points, const RatVec& y) {
  const AffineFrame frame(points);
  const auto c = frame.coordinates(y);
  if (!c) return false;
  if (frame.dimension() == 0) return true;
  for (const auto& f : facets_full(local_points(points, frame), frame.dimension()))
    if (dot(f.normal, *c) > f.offset) return false;
  return true;
}

}  // namespace thetabal::polytope
