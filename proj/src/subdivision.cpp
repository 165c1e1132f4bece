#include "thetabal/subdivision.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "thetabal/error.hpp"
#include "thetabal/polytope.hpp"

namespace thetabal {
namespace {

std::vector<RatVec> as_points(const std::vector<LatticeVector>& vs) {
  std::vector<RatVec> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(to_rational(v));
  return out;
}

// Visits every lattice point of the box [lo, hi]^n.
void for_each_box_point(int n, std::int64_t lo, std::int64_t hi,
                        const std::function<void(const LatticeVector&)>& f) {
  LatticeVector m(static_cast<std::size_t>(n), lo);
  while (true) {
    f(m);
    int i = n - 1;
    while (i >= 0 && m[static_cast<std::size_t>(i)] == hi) {
      m[static_cast<std::size_t>(i)] = lo;
      --i;
    }
    if (i < 0) return;
    ++m[static_cast<std::size_t>(i)];
  }
}

void for_each_combination(std::size_t n, std::size_t r, const std::function<void(const std::vector<std::size_t>&)>& f) {
  if (r > n) return;
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(idx);
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Upper bound on the covering radius of M in the Z-metric, squared: any point
// lies within 1/2 sum_i |e_i|_Z of a lattice point.
double covering_radius_sq_bound(const QForm& q) {
  double s = 0;
  for (int i = 0; i < q.rank(); ++i) s += std::sqrt(static_cast<double>(q(i, i)));
  return 0.25 * s * s;
}

int initial_window(const QForm& q) {
  const double rho = std::sqrt(covering_radius_sq_bound(q));
  int w = 1;
  for (int i = 0; i < q.rank(); ++i) {
    const double zinv_ii = to_double(q.inverse()[i][i]);
    w = std::max(w, static_cast<int>(std::ceil(2.0 * rho * std::sqrt(zinv_ii))));
  }
  return w;
}

struct BoxPoint {
  LatticeVector m;
  std::int64_t value;  // phi_bar(m)
};

// Lower-hull faces through the origin whose vertices lie among `candidates`,
// each checked against every point of `box`.
std::vector<Cell> star_from_candidates(const QForm& q, const std::vector<BoxPoint>& box,
                                       const std::vector<std::size_t>& candidates) {
  const int n = q.rank();
  std::set<RatVec> seen_slopes;
  std::vector<Cell> star;
  for_each_combination(candidates.size(), static_cast<std::size_t>(n), [&](const std::vector<std::size_t>& pick) {
    RatMat a;
    RatVec b;
    for (auto p : pick) {
      const auto& bp = box[candidates[p]];
      a.push_back(to_rational(bp.m));
      b.emplace_back(static_cast<long>(bp.value));
    }
    RatVec slope;
    if (!solve(a, b, slope)) return;
    if (!seen_slopes.insert(slope).second) return;

    // Integer form: num . m <= den * phi_bar(m). Box points are sorted by
    // phi_bar, so violations near the origin are found first.
    mpz_class den = 1;
    for (const auto& sl : slope) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), sl.get_den_mpz_t());
    std::vector<__int128> num;
    for (const auto& sl : slope) {
      const mpz_class v = sl.get_num() * (den / sl.get_den());
      if (!v.fits_slong_p()) throw WindowExhaustedError("slope numerator overflow");
      num.push_back(v.get_si());
    }
    if (!den.fits_slong_p()) throw WindowExhaustedError("slope denominator overflow");
    const __int128 d = den.get_si();

    std::vector<LatticeVector> verts{LatticeVector(static_cast<std::size_t>(n), 0)};
    for (const auto& bp : box) {
      __int128 lhs = 0;
      for (int i = 0; i < n; ++i) lhs += num[static_cast<std::size_t>(i)] * bp.m[static_cast<std::size_t>(i)];
      const __int128 rhs = d * bp.value;
      if (lhs > rhs) return;
      if (lhs == rhs) verts.push_back(bp.m);
    }
    std::sort(verts.begin(), verts.end());
    if (polytope::affine_dimension(as_points(verts)) != n) return;
    star.push_back(Cell{std::move(verts), n, AffineLinear{slope, Rational(0)}});
  });
  return star;
}

// Empty-ellipsoid certificate: the ellipsoid {phi_bar <= ell} with center
// c = Z^{-1} slope and Z-radius^2 = c.Zc must sit inside the window box, so
// no lattice point outside the box can undercut the face.
bool ellipsoid_inside_window(const QForm& q, const Cell& cell, int w) {
  const int n = q.rank();
  RatVec c(static_cast<std::size_t>(n), Rational(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i)] += q.inverse()[i][j] * cell.affine->slope[static_cast<std::size_t>(j)];
  const Rational r2 = dot(c, cell.affine->slope);
  for (int i = 0; i < n; ++i) {
    const Rational margin = Rational(w) - abs(c[static_cast<std::size_t>(i)]);
    if (sgn(margin) < 0 || margin * margin < r2 * q.inverse()[i][i]) return false;
  }
  return true;
}

// Every facet through the origin is shared by exactly two star cells, so the
// cones at 0 close up into a complete fan.
bool closes_fan(const std::vector<Cell>& star, int n) {
  if (star.empty()) return false;
  const LatticeVector origin(static_cast<std::size_t>(n), 0);
  std::map<std::vector<LatticeVector>, int> ridge_count;
  for (const auto& cell : star) {
    const auto pts = as_points(cell.vertices);
    const auto origin_idx =
        static_cast<std::size_t>(std::find(cell.vertices.begin(), cell.vertices.end(), origin) - cell.vertices.begin());
    for (const auto& f : polytope::facets(pts)) {
      if (std::find(f.vertices.begin(), f.vertices.end(), origin_idx) == f.vertices.end()) continue;
      std::vector<LatticeVector> key;
      for (auto i : f.vertices) key.push_back(cell.vertices[i]);
      ++ridge_count[key];
    }
  }
  for (const auto& [key, count] : ridge_count)
    if (count != 2) return false;
  return true;
}

// Certified lower-hull faces through the origin over the window [-w, w]^n.
// Candidate vertices are taken from growing Z-shells; any certified complete
// fan is the true star, since certified cells are genuine hull faces with
// disjoint interiors. Returns nullopt if the window is too small.
std::optional<std::vector<Cell>> hull_star(const QForm& q, int w) {
  const int n = q.rank();
  std::vector<BoxPoint> box;
  for_each_box_point(n, -w, w, [&](const LatticeVector& m) {
    if (std::all_of(m.begin(), m.end(), [](std::int64_t c) { return c == 0; })) return;
    box.push_back({m, phi_bar(q, m)});
  });
  std::stable_sort(box.begin(), box.end(), [](const BoxPoint& a, const BoxPoint& b) { return a.value < b.value; });

  // Vertices of a cell through 0 lie within Z-distance 2*rho of the origin.
  const double reach = 4.0 * covering_radius_sq_bound(q) * (1.0 + 1e-9) + 1e-9;
  std::int64_t shell = 0;
  for (int i = 0; i < n; ++i) shell = std::max(shell, q(i, i));
  while (true) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < box.size(); ++i)
      if (box[i].value <= shell) candidates.push_back(i);
    std::vector<Cell> star = star_from_candidates(q, box, candidates);
    const bool certified = closes_fan(star, n) && std::all_of(star.begin(), star.end(), [&](const Cell& c) {
                             return ellipsoid_inside_window(q, c, w);
                           });
    if (certified) {
      std::sort(star.begin(), star.end(), [](const Cell& a, const Cell& b) { return a.vertices < b.vertices; });
      return star;
    }
    if (2.0 * static_cast<double>(shell) > reach) return std::nullopt;
    shell *= 2;
  }
}

mpz_class floor_of(const Rational& x) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return f;
}

std::string component_label(const Cell& c) {
  const int n = c.dim;
  const auto& v = c.vertices;
  if (static_cast<int>(v.size()) == n + 1) {
    RatMat e;
    for (std::size_t j = 1; j < v.size(); ++j) {
      RatVec row;
      for (int i = 0; i < n; ++i) row.emplace_back(static_cast<long>(v[j][static_cast<std::size_t>(i)] - v[0][static_cast<std::size_t>(i)]));
      e.push_back(std::move(row));
    }
    if (abs(determinant(e)) == 1) return n == 1 ? "P^1" : "P^" + std::to_string(n);
    return "simplex";
  }
  if (static_cast<int>(v.size()) == (1 << n)) {
    // Parallelepiped test: the vertex set equals all subset sums of some n
    // edge vectors at the lexicographically smallest vertex.
    std::vector<LatticeVector> diffs;
    for (std::size_t j = 1; j < v.size(); ++j) {
      LatticeVector d(v[j].size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = v[j][i] - v[0][i];
      diffs.push_back(std::move(d));
    }
    std::set<LatticeVector> all(diffs.begin(), diffs.end());
    all.insert(LatticeVector(v[0].size(), 0));
    bool cube = false;
    for_each_combination(diffs.size(), static_cast<std::size_t>(n), [&](const std::vector<std::size_t>& pick) {
      if (cube) return;
      std::set<LatticeVector> sums;
      for (int mask = 0; mask < (1 << n); ++mask) {
        LatticeVector s(v[0].size(), 0);
        for (int b = 0; b < n; ++b)
          if (mask & (1 << b))
            for (std::size_t i = 0; i < s.size(); ++i) s[i] += diffs[pick[static_cast<std::size_t>(b)]][i];
        sums.insert(std::move(s));
      }
      cube = (sums == all);
    });
    if (cube) return n == 2 ? "P^1xP^1" : "(P^1)^" + std::to_string(n);
  }
  return "toric";
}

}  // namespace

Cell translate(const QForm& q, const Cell& c, const LatticeVector& g) {
  Cell out;
  out.dim = c.dim;
  out.vertices = c.vertices;
  for (auto& v : out.vertices)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += g[i];
  if (c.affine) {
    const RatVec gr = to_rational(g);
    AffineLinear a;
    a.slope = c.affine->slope;
    const LatticeVector zg = q.apply(g);
    for (std::size_t i = 0; i < a.slope.size(); ++i) a.slope[i] += static_cast<long>(zg[i]);
    a.constant = c.affine->constant - dot(c.affine->slope, gr) - make_rational(q.bilinear(g, g), 2);
    out.affine = std::move(a);
  }
  return out;
}

std::vector<LatticeVector> canonical_vertices(std::int64_t k, std::vector<LatticeVector> vertices) {
  std::sort(vertices.begin(), vertices.end());
  const LatticeVector base = vertices.front();
  const LatticeVector red = reduce_mod(k, base);
  for (auto& v : vertices)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += red[i] - base[i];
  return vertices;
}

PeriodicSubdivision::PeriodicSubdivision(QForm q, std::int64_t k, std::vector<Cell> star, int window)
    : q_(std::move(q)), k_(k), star_(std::move(star)), window_(window) {
  if (k_ < 1) throw ConfigError("level k must be >= 1");
  const int n = q_.rank();

  std::map<std::vector<LatticeVector>, Cell> quotient;
  for (const auto& cell : star_) {
    for_each_box_point(n, 0, k_ - 1, [&](const LatticeVector& u) {
      LatticeVector g(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) g[i] = u[i] - cell.vertices.front()[i];
      Cell t = translate(q_, cell, g);
      quotient.emplace(t.vertices, std::move(t));
    });
  }
  for (auto& [key, cell] : quotient) cells_.push_back(std::move(cell));

  std::set<RatVec> seen;
  for (const auto& cell : star_) {
    for_each_box_point(n, -window_, window_ + 1, [&](const LatticeVector& g) {
      Cell t = translate(q_, cell, g);
      if (seen.insert(t.affine->slope).second) unit_pieces_.push_back(std::move(*t.affine));
    });
  }
}

std::vector<Cell> PeriodicSubdivision::star_at(const LatticeVector& m) const {
  std::vector<Cell> out;
  out.reserve(star_.size());
  for (const auto& c : star_) out.push_back(translate(q_, c, m));
  return out;
}

std::vector<AffineLinear> PeriodicSubdivision::active_pieces(const RatVec& y, Rational* value) const {
  if (y.size() != static_cast<std::size_t>(rank())) throw ConfigError("dimension mismatch");
  LatticeVector gamma(y.size());
  RatVec y0 = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    gamma[i] = floor_of(y[i]).get_si();
    y0[i] -= static_cast<long>(gamma[i]);
  }
  std::vector<Rational> vals;
  vals.reserve(unit_pieces_.size());
  Rational best;
  for (std::size_t i = 0; i < unit_pieces_.size(); ++i) {
    vals.push_back(unit_pieces_[i](y0));
    if (i == 0 || vals.back() > best) best = vals.back();
  }
  std::vector<AffineLinear> active;
  for (std::size_t i = 0; i < unit_pieces_.size(); ++i) {
    if (vals[i] != best) continue;
    Cell c{{}, rank(), unit_pieces_[i]};
    active.push_back(*translate(q_, c, gamma).affine);
  }
  if (value) *value = best + alpha(q_, gamma)(y0);
  return active;
}

PeriodicSubdivision build_subdivision(const QForm& q, std::int64_t k) {
  if (k < 1) throw ConfigError("level k must be >= 1");
  int w = initial_window(q);
  for (int attempt = 0; attempt < 4; ++attempt, w += std::max(1, w / 2)) {
    if (auto star = hull_star(q, w)) return PeriodicSubdivision(q, k, std::move(*star), w);
  }
  throw WindowExhaustedError("could not certify lower-hull faces within lattice window " + std::to_string(w));
}

Rational eval_phi(const PeriodicSubdivision& s, const RatVec& y) {
  Rational v;
  s.active_pieces(y, &v);
  return v;
}

bool slope_integrality(std::span<const Cell> cells) {
  for (const auto& c : cells) {
    if (!c.affine) continue;
    for (const auto& s : c.affine->slope)
      if (!is_integer(s)) return false;
  }
  return true;
}

bool slope_integrality(const PeriodicSubdivision& s) { return slope_integrality(std::span<const Cell>(s.star())); }

QuotientComplex quotient_complex(const PeriodicSubdivision& s) {
  const int n = s.rank();
  QuotientComplex out;
  out.cells_by_dim.resize(static_cast<std::size_t>(n + 1));
  std::vector<std::set<std::vector<LatticeVector>>> seen(static_cast<std::size_t>(n + 1));
  for (const auto& top : s.cells()) {
    const auto pts = as_points(top.vertices);
    for (const auto& face : polytope::faces(pts)) {
      std::vector<LatticeVector> verts;
      for (auto i : face) verts.push_back(top.vertices[i]);
      const std::vector<RatVec> fp = as_points(verts);
      const int d = polytope::affine_dimension(fp);
      auto canon = canonical_vertices(s.level(), verts);
      if (!seen[static_cast<std::size_t>(d)].insert(canon).second) continue;
      Cell c{std::move(canon), d, std::nullopt};
      if (d == n) c.affine = top.affine;
      out.cells_by_dim[static_cast<std::size_t>(d)].push_back(std::move(c));
    }
  }
  for (auto& level : out.cells_by_dim)
    std::sort(level.begin(), level.end(), [](const Cell& a, const Cell& b) { return a.vertices < b.vertices; });
  // Keep the affine data of the top cells consistent with the canonical reps.
  for (auto& c : out.cells_by_dim[static_cast<std::size_t>(n)]) {
    for (const auto& top : s.cells())
      if (top.vertices == c.vertices) c.affine = top.affine;
    out.components.push_back(component_label(c));
  }
  for (std::size_t d = 0; d < out.cells_by_dim.size(); ++d) {
    const auto count = static_cast<std::int64_t>(out.cells_by_dim[d].size());
    out.euler_characteristic += (d % 2 == 0) ? count : -count;
  }
  return out;
}

}  // namespace thetabal
