#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "thetabal/error.hpp"
#include "thetabal/theta.hpp"
#include "theta_oracle.hpp"

using namespace thetabal;
using thetabal::testing::oracle_theta;
using Rows = std::vector<std::vector<std::int64_t>>;

namespace {

const double kPi = std::numbers::pi;

struct Sample {
  QForm q;
  std::int64_t k;
  Complex t;
  LatticeVector m;
  ComplexVec w;
};

Sample random_sample(std::mt19937_64& rng, double im_bound) {
  static const std::vector<QForm> forms{QForm(Rows{{2}}), QForm(Rows{{4}}), QForm(Rows{{2, 1}, {1, 2}}),
                                        QForm(Rows{{2, 0}, {0, 2}}), QForm(Rows{{4, 1}, {1, 2}})};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const QForm& q = forms[rng() % forms.size()];
  const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 3);
  const Complex t = std::polar(0.05 + 0.55 * u(rng), 2 * kPi * u(rng));
  LatticeVector m;
  ComplexVec w;
  for (int i = 0; i < q.rank(); ++i) {
    m.push_back(static_cast<std::int64_t>(rng() % 7) - 3);
    w.emplace_back(u(rng), im_bound * (2 * u(rng) - 1));
  }
  return {q, k, t, m, w};
}

}  // namespace

TEST_CASE("truncation radius") {
  const QForm q(Rows{{2}});
  const int r = truncation_radius(q, 0.3, 1e-12, 0.0);
  CHECK(r <= 9);
  // direct tail summation oracle
  double tail = 0;
  for (int v = r + 1; v < 60; ++v) tail += 2 * std::pow(0.3, v * v);
  CHECK(tail < 1e-12);
  CHECK(truncation_radius(q, 0.3, 1e-6, 0.0) <= r);
  int prev = 0;
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const int cur = truncation_radius(q, a, 1e-12, 1.0);
    CHECK(cur >= prev);
    prev = cur;
  }
  CHECK_THROWS_AS(truncation_radius(q, 1.0, 1e-12, 1.0), ConfigError);
  CHECK_THROWS_AS(truncation_radius(q, 0.3, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(ThetaContext(q, 3, Complex(0.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(ThetaContext(q, 0, 0.3), ConfigError);
}

TEST_CASE("values at the origin") {
  const ThetaContext ctx(QForm(Rows{{2}}), 3, 0.3);
  const ComplexVec w{0.0};
  const Complex t0 = theta_eval(ctx, {0}, w);
  CHECK(t0.real() == doctest::Approx(1 + 2 * std::pow(0.3, 9) + 2 * std::pow(0.3, 36)).epsilon(1e-15));
  CHECK(std::abs(t0.real() - 1.0000393660) < 1e-10);
  const Complex t1 = theta_eval(ctx, {1}, w);
  CHECK(std::abs(t1.real() - 0.3081000043) < 1e-10);
  CHECK(std::abs(t0.imag()) < 1e-16);
  const ThetaContext small(QForm(Rows{{2}}), 3, 1e-6);
  CHECK(std::abs(theta_eval(small, {0}, w) - 1.0) < 1e-12);
  CHECK(std::abs(theta_eval(small, {1}, w) - 1e-6) < 1e-12);
  CHECK_THROWS_AS(theta_eval(ctx, {0}, ComplexVec{Complex(0.0, 1.5)}), ConfigError);
  CHECK_THROWS_AS(theta_eval(ctx, {0, 0}, w), ConfigError);
}

TEST_CASE("agreement with the 50-digit series") {
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int s = 0; s < 60; ++s) {
    const Sample smp = random_sample(rng, 0.5);
    const ThetaContext ctx(smp.q, smp.k, smp.t, {1e-12, 0.5});
    const Complex ref = oracle_theta(smp.q, smp.k, smp.t, smp.m, smp.w);
    // double resolution: a few ulps of |theta| once it exceeds 1
    const double err = std::abs(theta_eval(ctx, smp.m, smp.w) - ref) / std::max(1.0, std::abs(ref));
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("gradient") {
  const ThetaContext ctx(QForm(Rows{{2}}), 3, 0.3);
  const ComplexVec g0 = theta_grad(ctx, {0}, ComplexVec{0.0});
  CHECK(std::abs(g0[0]) < 1e-15);
  std::mt19937_64 rng(77);
  for (int s = 0; s < 40; ++s) {
    const Sample smp = random_sample(rng, 0.4);
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-12, 0.5});
    const ComplexVec g = theta_grad(c, smp.m, smp.w);
    const double h = 1e-6;
    for (int i = 0; i < smp.q.rank(); ++i) {
      ComplexVec wp = smp.w, wm = smp.w;
      wp[i] += h;
      wm[i] -= h;
      ComplexVec wp2 = wp, wm2 = wm;
      wp2[i] += h;
      wm2[i] -= h;
      // five-point central stencil; the three-point one carries h^2 f'''/6 ~ 1e-8
      const Complex fd = (8.0 * (theta_eval(c, smp.m, wp) - theta_eval(c, smp.m, wm)) -
                          (theta_eval(c, smp.m, wp2) - theta_eval(c, smp.m, wm2))) /
                         (12 * h);
      // the stencil itself carries cancellation noise ~ |theta| eps / h
      const double scale = std::max(std::abs(g[i]), std::abs(theta_eval(c, smp.m, smp.w)));
      CHECK(std::abs(g[i] - fd) / scale < 1e-8);
    }
    ComplexVec shifted = smp.w;
    shifted[0] += 1.0;
    const ComplexVec g1 = theta_grad(c, smp.m, shifted);
    for (int i = 0; i < smp.q.rank(); ++i) CHECK(std::abs(g1[i] - g[i]) < 1e-10 * (1 + std::abs(g[i])));
  }
}

TEST_CASE("truncation certificate: a much larger window changes nothing") {
  std::mt19937_64 rng(5);
  for (int s = 0; s < 20; ++s) {
    const Sample smp = random_sample(rng, 0.5);
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-12, 0.5});
    const ThetaContext wide(smp.q, smp.k, smp.t, {1e-40, 1.0});
    REQUIRE(wide.radius() > c.radius());
    CHECK(std::abs(theta_eval(c, smp.m, smp.w) - theta_eval(wide, smp.m, smp.w)) < 1e-12);
  }
}

TEST_CASE("reflection symmetry") {
  std::mt19937_64 rng(8);
  for (int s = 0; s < 20; ++s) {
    const Sample smp = random_sample(rng, 0.5);
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-12, 0.5});
    ComplexVec neg = smp.w;
    LatticeVector mneg = smp.m;
    for (auto& x : neg) x = -x;
    for (auto& x : mneg) x = -x;
    CHECK(std::abs(theta_eval(c, smp.m, neg) - theta_eval(c, mneg, smp.w)) < 1e-12);
  }
}

TEST_CASE("quasi-periodicity") {
  const QForm q(Rows{{2}});
  const ThetaContext ctx(q, 3, 0.3, {1e-12, 2.0});
  const ComplexVec w{Complex(0.1, 0.05)};
  CHECK(quasi_periodicity_defect(ctx, {1}, w, {0}, {1}) < 1e-10);
  CHECK(quasi_periodicity_defect(ctx, {1}, w, {1}, {0}) < 1e-12);
  std::mt19937_64 rng(99);
  for (int s = 0; s < 40; ++s) {
    const Sample smp = random_sample(rng, 0.2);
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-12, 4.0});
    // keep tau_s Z p inside the certified band
    LatticeVector p(smp.q.rank(), 0), mu(smp.q.rank(), 0);
    p[rng() % p.size()] = (rng() % 2) ? 1 : -1;
    mu[rng() % mu.size()] = static_cast<std::int64_t>(rng() % 5) - 2;
    bool inside = true;
    const LatticeVector zp = smp.q.apply(p);
    for (int i = 0; i < smp.q.rank(); ++i)
      inside = inside && std::abs(smp.w[i].imag() + c.tau_s().imag() * zp[i]) <= 4.0;
    if (!inside) continue;
    CHECK(quasi_periodicity_defect(c, smp.m, smp.w, mu, p) < 1e-10);
  }
}

TEST_CASE("monodromy leaves values unchanged") {
  std::mt19937_64 rng(31);
  for (int s = 0; s < 30; ++s) {
    const Sample smp = random_sample(rng, 0.5);
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-12, 0.5});
    const ThetaContext turned = ThetaContext::with_log_t(smp.q, smp.k, c.log_t() + Complex(0, 2 * kPi), {1e-12, 0.5});
    const Complex a = theta_eval(c, smp.m, smp.w);
    CHECK(std::abs(a - theta_eval(turned, smp.m, smp.w)) / std::max(1.0, std::abs(a)) < 1e-14);
  }
}

TEST_CASE("batch and slab evaluation agree with single evaluation") {
  const QForm q(Rows{{2, 1}, {1, 2}});
  const ThetaContext ctx(q, 3, std::polar(0.4, 1.0));
  const ComplexVec pts{Complex(0.1, 0.2), Complex(0.7, -0.3), Complex(0.5, 0.2), Complex(0.05, -0.3),
                       Complex(0.9, 0.2), Complex(0.33, -0.3)};
  const ThetaBatch b = theta_batch(ctx, pts, true);
  REQUIRE(b.points == 3);
  for (std::size_t p = 0; p < 3; ++p) {
    const ComplexVec w{pts[2 * p], pts[2 * p + 1]};
    const ComplexVec all = theta_vector(ctx, w);
    for (std::size_t m = 0; m < 9; ++m) {
      CHECK(b.value(m, p) == all[m]);
      const ComplexVec g = theta_grad(ctx, residue_from_index(3, 2, m), w);
      CHECK(std::abs(b.grad(m, 0, p) - g[0]) < 1e-13);
    }
  }
  // slab: shared Im w, values rescaled by exp(log_scale)
  const std::vector<double> im{0.2, -0.3}, re{0.1, 0.7, 0.5, 0.05, 0.9, 0.33};
  const ThetaBatch s = theta_slab(ctx, im, re, true);
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::size_t m = 0; m < 9; ++m) {
      const double scale = std::exp(s.log_scale);
      CHECK(std::abs(s.value(m, p) * scale - b.value(m, p)) < 1e-13);
      CHECK(std::abs(s.grad(m, 1, p) * scale - b.grad(m, 1, p)) < 1e-12);
    }
  }
}

TEST_CASE("Heisenberg matrices") {
  const auto perm = heisenberg_translate(3, {1});
  CHECK(perm == std::vector<std::size_t>{1, 2, 0});
  const ComplexVec ph = heisenberg_phase(3, {1});
  CHECK(std::abs(ph[0] - 1.0) < 1e-16);
  CHECK(std::abs(ph[1] - std::polar(1.0, 2 * kPi / 3)) < 1e-15);
  CHECK(std::abs(ph[2] - std::polar(1.0, 4 * kPi / 3)) < 1e-15);
  const Eigen::MatrixXcd t = translate_matrix(3, {1}), s = phase_matrix(3, {1});
  const Eigen::MatrixXcd comm = s * t * s.inverse() * t.inverse();
  CHECK((comm - std::polar(1.0, 2 * kPi / 3) * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-15);
  CHECK((s * t - std::polar(1.0, 2 * kPi / 3) * t * s).norm() < 1e-15);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t k = 2 + static_cast<std::int64_t>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 2);
    auto rnd = [&] {
      LatticeVector v(static_cast<std::size_t>(n));
      for (auto& x : v) x = static_cast<std::int64_t>(rng() % 11) - 5;
      return v;
    };
    const HeisenbergElement g{k, static_cast<std::int64_t>(rng() % k), reduce_mod(k, rnd()), reduce_mod(k, rnd())};
    const HeisenbergElement h{k, static_cast<std::int64_t>(rng() % k), reduce_mod(k, rnd()), reduce_mod(k, rnd())};
    const HeisenbergElement f{k, static_cast<std::int64_t>(rng() % k), reduce_mod(k, rnd()), reduce_mod(k, rnd())};
    CHECK((g * h) * f == g * (h * f));
    CHECK(g * heisenberg_identity(k, n) == g);
    CHECK((representation_matrix(g * h) - representation_matrix(g) * representation_matrix(h)).norm() < 1e-12);
    const LatticeVector a = rnd(), a2 = rnd();
    LatticeVector sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + a2[i];
    CHECK(translate_matrix(k, a) * translate_matrix(k, a2) == translate_matrix(k, sum));
    CHECK((phase_matrix(k, a) * phase_matrix(k, a2) - phase_matrix(k, sum)).norm() < 1e-13);
  }
}

TEST_CASE("Heisenberg action on theta values") {
  std::mt19937_64 rng(17);
  for (int s = 0; s < 30; ++s) {
    const Sample smp = random_sample(rng, 0.3);
    if (smp.k == 1) continue;
    const ThetaContext c(smp.q, smp.k, smp.t, {1e-13, 2.5});
    const int n = smp.q.rank();
    LatticeVector a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<std::int64_t>(rng() % 3) - 1;
      b[i] = static_cast<std::int64_t>(rng() % 5) - 2;
    }
    // phase: theta_m(w + b/k) = e^{2 pi i <b,m>/k} theta_m(w)
    ComplexVec wb = smp.w;
    std::int64_t bm = 0;
    for (int i = 0; i < n; ++i) {
      wb[i] += static_cast<double>(b[i]) / static_cast<double>(smp.k);
      bm += b[i] * smp.m[i];
    }
    const Complex lhs = theta_eval(c, smp.m, wb);
    const Complex rhs = std::polar(1.0, 2 * kPi * static_cast<double>(bm) / static_cast<double>(smp.k)) * theta_eval(c, smp.m, smp.w);
    CHECK(std::abs(lhs - rhs) < 1e-10);
    // translate: theta_m(w + tau Z a) e^{pi i (2<w,a> + tau Z(a,a))} = theta_{m+a}(w)
    const LatticeVector za = smp.q.apply(a);
    ComplexVec wa = smp.w;
    Complex wa_dot = 0;
    for (int i = 0; i < n; ++i) {
      wa[i] += c.tau() * static_cast<double>(za[i]);
      wa_dot += smp.w[i] * static_cast<double>(a[i]);
    }
    LatticeVector ma = smp.m;
    for (int i = 0; i < n; ++i) ma[i] += a[i];
    const Complex f = std::exp(Complex(0, kPi) * (2.0 * wa_dot + c.tau() * static_cast<double>(smp.q.bilinear(a, a))));
    CHECK(std::abs(theta_eval(c, smp.m, wa) * f - theta_eval(c, ma, smp.w)) < 1e-10);
  }
}

TEST_CASE("local expansion at the origin of the three-cycle") {
  const auto s = build_subdivision(QForm(Rows{{2}}), 3);
  const RatVec origin{Rational(0)};
  // z1 = Z^(1,1), z2 = Z^(-1,1); exponents written out for nu = 1, 2, 3.
  auto expected = [](int m) {
    std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> terms;
    if (m == 0) terms.push_back({{0, 0}, 0});
    if (m == 1) terms.push_back({{1, 0}, 0});
    if (m == 2) terms.push_back({{0, 1}, 0});
    for (std::int64_t nu = 1; nu <= 3; ++nu) {
      const std::int64_t a = 9 * nu * nu - 3 * nu, b = 9 * nu * nu + 3 * nu, c = 9 * nu * nu - 9 * nu + 2;
      if (m == 0) {
        terms.push_back({{3 * nu, 0}, a});
        terms.push_back({{0, 3 * nu}, a});
      } else if (m == 1) {
        terms.push_back({{1 + 3 * nu, 0}, b});
        terms.push_back({{0, 3 * nu - 1}, c});
      } else {
        terms.push_back({{3 * nu - 1, 0}, c});
        terms.push_back({{0, 3 * nu + 1}, b});
      }
    }
    std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return std::tie(x.second, x.first) < std::tie(y.second, y.first); });
    return terms;
  };
  for (int m = 0; m < 3; ++m) {
    const LocalExpansion e = monomial_expansion(s, origin, {m}, 3);
    CHECK(e.generators == std::vector<LatticeVector>{{1, 1}, {-1, 1}});
    std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> got;
    for (const auto& t : e.terms) got.push_back({t.z_exps, t.t_exp});
    // the centred window |nu| <= 3 holds the expected terms plus one more on one side
    const auto want = expected(m);
    for (const auto& w : want) CHECK(std::find(got.begin(), got.end(), w) != got.end());
    CHECK(got.size() == 7);
  }
  CHECK(monomial_expansion(s, origin, {2}, 3).terms == monomial_expansion(s, origin, {-4}, 3).terms);
  CHECK_THROWS_AS(monomial_expansion(s, RatVec{make_rational(1, 2)}, {0}, 2), ConfigError);
}

TEST_CASE("local expansions in two dimensions reconstruct the lattice terms") {
  for (const QForm& q : {QForm(Rows{{2, 0}, {0, 2}}), QForm(Rows{{2, 1}, {1, 2}}), QForm(Rows{{4, 1}, {1, 2}})}) {
    const auto s = build_subdivision(q, 2);
    const LatticeVector p{1, 0};
    const LocalExpansion e = monomial_expansion(s, RatVec{Rational(1), Rational(0)}, {1, 1}, 2);
    CHECK(e.terms.size() == 25);
    for (const auto& t : e.terms) {
      CHECK(t.t_exp >= 0);
      LatticeVector lift(3, 0);
      for (std::size_t j = 0; j < e.generators.size(); ++j)
        for (int i = 0; i < 3; ++i) lift[i] += t.z_exps[j] * e.generators[j][i];
      lift[2] += t.t_exp;
      const LatticeVector& v = t.monomial.m;
      CHECK(lift[0] == v[0] - p[0]);
      CHECK(lift[1] == v[1] - p[1]);
      CHECK(lift[2] == phi_bar(q, v) - phi_bar(q, p));
      CHECK(in_cone(s, t.monomial));
    }
  }
  const auto oct = build_subdivision(QForm(Rows{{2, 1, 1}, {1, 2, 1}, {1, 1, 2}}), 1);
  bool simplicial = true;
  for (const auto& c : oct.star()) simplicial = simplicial && c.vertices.size() == 4;
  if (!simplicial) CHECK_THROWS_AS(monomial_expansion(oct, RatVec(3, Rational(0)), {0, 0, 0}, 1), ConfigError);
}

TEST_CASE("cone membership") {
  const auto s = build_subdivision(QForm(Rows{{2}}), 3);
  CHECK(in_cone(s, {{4}, 16, 1}));
  CHECK_FALSE(in_cone(s, {{4}, 15, 1}));
  CHECK(in_cone(s, {{1}, 1, 2}));  // 2 phi(1/2) = 1
  CHECK_FALSE(in_cone(s, {{1}, 0, 2}));
  CHECK(in_cone(s, {{0}, 5, 0}));
  CHECK_FALSE(in_cone(s, {{1}, 5, 0}));
}

TEST_CASE("restriction to components") {
  const auto s = build_subdivision(QForm(Rows{{2}}), 3);
  const Cell& sigma = s.cells()[1];  // [1, 2]
  REQUIRE(sigma.vertices == std::vector<LatticeVector>{{1}, {2}});
  CHECK_FALSE(restricts_nonzero(s, sigma, {0}));
  CHECK(restricts_nonzero(s, sigma, {1}));
  CHECK(restricts_nonzero(s, sigma, {2}));
  CHECK(restricts_nonzero(s, sigma, {-1}));
}
