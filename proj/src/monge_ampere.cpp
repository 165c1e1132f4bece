#include "thetabal/monge_ampere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "thetabal/error.hpp"
#include "thetabal/polytope.hpp"
#include "thetabal/summation.hpp"

namespace thetabal {
namespace {

std::vector<RatVec> hull_vertices(std::vector<RatVec> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<RatVec> out;
  for (auto i : polytope::extreme_points(pts)) out.push_back(pts[i]);
  return out;
}

}  // namespace

Rational AtomicMeasure::total() const {
  Rational t = 0;
  for (const auto& a : atoms) t += a.mass;
  return t;
}

std::vector<RatVec> subdifferential(const PeriodicSubdivision& s, const RatVec& y0) {
  std::vector<RatVec> slopes;
  for (const auto& a : s.active_pieces(y0)) slopes.push_back(a.slope);
  return hull_vertices(std::move(slopes));
}

DualCell dual_cell(const PeriodicSubdivision& s, const LatticeVector& m) {
  std::vector<RatVec> slopes;
  for (const auto& c : s.star_at(m)) slopes.push_back(c.affine->slope);
  return DualCell{m, hull_vertices(std::move(slopes))};
}

AtomicMeasure ma_measure(const PeriodicSubdivision& s) {
  AtomicMeasure mu;
  const std::size_t count = residue_count(s.level(), s.rank());
  for (std::size_t idx = 0; idx < count; ++idx) {
    const LatticeVector m = residue_from_index(s.level(), s.rank(), idx);
    const DualCell d = dual_cell(s, m);
    mu.atoms.push_back(Atom{m, polytope::volume(d.vertices)});
  }
  return mu;
}

AtomicMeasure ma_measure(const PeriodicSubdivision& s, const AffineLinear& added) {
  AtomicMeasure mu;
  const std::size_t count = residue_count(s.level(), s.rank());
  for (std::size_t idx = 0; idx < count; ++idx) {
    const LatticeVector m = residue_from_index(s.level(), s.rank(), idx);
    std::vector<RatVec> slopes;
    for (const auto& c : s.star_at(m)) {
      RatVec sl = c.affine->slope;
      for (std::size_t i = 0; i < sl.size(); ++i) sl[i] += added.slope[i];
      slopes.push_back(std::move(sl));
    }
    mu.atoms.push_back(Atom{m, polytope::volume(hull_vertices(std::move(slopes)))});
  }
  return mu;
}

Rational max_hull_gap(const PeriodicSubdivision& s) {
  // On a top cell sigma, phi - phi_bar = ell_sigma - phi_bar is a concave
  // quadratic. Its maximum over sigma is attained at the stationary point of
  // its restriction to the affine hull of some face containing that point.
  const QForm& q = s.form();
  const RatMat z = q.as_rational();
  Rational best = 0;
  for (const auto& cell : s.star()) {
    std::vector<RatVec> pts;
    for (const auto& v : cell.vertices) pts.push_back(to_rational(v));
    const AffineLinear& ell = *cell.affine;
    for (const auto& face : polytope::faces(pts)) {
      std::vector<RatVec> fp;
      for (auto i : face) fp.push_back(pts[i]);
      const polytope::AffineFrame frame(fp);
      const std::size_t d = static_cast<std::size_t>(frame.dimension());
      if (d == 0) continue;  // gap vanishes at lattice points
      const RatVec& p0 = frame.origin();
      const auto& b = frame.basis();
      // Stationarity: B^T Z B c = B^T (slope - Z p0).
      const RatVec zp0 = q.apply(p0);
      RatMat a(d, RatVec(d));
      RatVec rhs(d);
      for (std::size_t i = 0; i < d; ++i) {
        const RatVec zbi = q.apply(b[i]);
        for (std::size_t j = 0; j < d; ++j) a[i][j] = dot(zbi, b[j]);
        RatVec g = ell.slope;
        for (std::size_t c = 0; c < g.size(); ++c) g[c] -= zp0[c];
        rhs[i] = dot(b[i], g);
      }
      RatVec coef;
      if (!solve(a, rhs, coef)) continue;
      RatVec y = p0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < y.size(); ++c) y[c] += coef[i] * b[i][c];
      if (!polytope::contains(fp, y)) continue;
      const Rational gap = ell(y) - phi_bar(q, y);
      if (gap > best) best = gap;
    }
  }
  return best;
}

Rational rescaled_sup_gap(const PeriodicSubdivision& s) {
  const Rational k(static_cast<long>(s.level()));
  return max_hull_gap(s) / (k * k);
}

Rational rescaled_sup_gap(const QForm& q, std::int64_t k) { return rescaled_sup_gap(build_subdivision(q, k)); }

int default_reference_resolution(int n) {
  switch (n) {
    case 1: return 1000000;
    case 2: return 1000;
    case 3: return 100;
    default: return 20;
  }
}

Pairing weak_convergence_pairing(const QForm& q, std::int64_t k, const TestFunction& f, int reference_resolution) {
  if (k < 1) throw ConfigError("level k must be >= 1");
  const int n = q.rank();
  const double det = to_double(q.determinant());
  const int res = reference_resolution > 0 ? reference_resolution : default_reference_resolution(n);

  auto grid_sum = [&](std::int64_t per_axis, double offset) {
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(per_axis);
    std::vector<double> vals(total);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t r = idx;
      for (int i = n - 1; i >= 0; --i) {
        y[static_cast<std::size_t>(i)] = (static_cast<double>(r % static_cast<std::size_t>(per_axis)) + offset) /
                                         static_cast<double>(per_axis);
        r /= static_cast<std::size_t>(per_axis);
      }
      vals[idx] = f(y);
    }
    return pairwise_sum<double>(vals) / static_cast<double>(total);
  };

  Pairing p;
  p.lhs = det * grid_sum(k, 0.0);
  p.rhs = det * grid_sum(res, 0.5);
  return p;
}

TestFunction named_test_function(const std::string& name) {
  using std::numbers::pi;
  if (name == "one") return [](std::span<const double>) { return 1.0; };
  if (name == "sin2")
    return [](std::span<const double> y) {
      double v = 1;
      for (double c : y) v *= std::sin(pi * c) * std::sin(pi * c);
      return v;
    };
  if (name == "tent")
    return [](std::span<const double> y) {
      double v = 1;
      for (double c : y) v *= c * (1.0 - c);
      return v;
    };
  if (name == "bump")
    return [](std::span<const double> y) {
      // Smooth bump supported in |y - 1/2| < 1/4 per axis.
      double v = 1;
      for (double c : y) {
        const double u = 4.0 * (c - 0.5);
        v *= (std::abs(u) < 1.0) ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
      }
      return v;
    };
  throw ConfigError("unknown test function '" + name + "' (expected one, sin2, bump, tent)");
}

}  // namespace thetabal
