#include "thetabal/balanced.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "thetabal/error.hpp"
#include "thetabal/summation.hpp"

namespace thetabal {

namespace {

constexpr double kPi = std::numbers::pi;

// H = (1/pi) d dbar log S from values v[m] and gradients g[m][i] at one point.
struct LocalForm {
  Eigen::MatrixXcd h;
  double s = 0.0;
  double scale = 0.0;  // trace of the positive part, for relative tests
};

LocalForm local_form(const ThetaBatch& b, std::size_t p) {
  const int n = b.dim;
  LocalForm out;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n);
  Eigen::MatrixXcd bb = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t m = 0; m < b.functions; ++m) {
    const Complex v = b.value(m, p);
    out.s += std::norm(v);
    for (int i = 0; i < n; ++i) {
      const Complex gi = b.grad(m, i, p);
      a(i) += gi * std::conj(v);
      for (int j = 0; j < n; ++j) bb(i, j) += gi * std::conj(b.grad(m, j, p));
    }
  }
  out.h = (out.s * bb - a * a.adjoint()) / (kPi * out.s * out.s);
  out.scale = bb.trace().real() / (kPi * out.s);
  return out;
}

double min_eigenvalue(const Eigen::MatrixXcd& h) {
  if (h.rows() == 1) return h(0, 0).real();
  if (h.rows() == 2) {
    const double tr = h(0, 0).real() + h(1, 1).real();
    const double det = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return 0.5 * tr - disc;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double real_det(const Eigen::MatrixXcd& h) {
  if (h.rows() == 1) return h(0, 0).real();
  if (h.rows() == 2) return (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
  return h.determinant().real();
}

std::string format_point(std::span<const Complex> w) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? ", " : "") << '[' << w[i].real() << ", " << w[i].imag() << ']';
  os << ']';
  return os.str();
}

void check_positive(const LocalForm& f, std::span<const Complex> w) {
  // Branch points of a non-embedding map make H singular but not negative.
  const double lo = min_eigenvalue(f.h);
  if (!std::isfinite(lo) || lo < -1e-8 * f.scale) {
    throw CertificationError("pulled-back Fubini-Study form is not positive semidefinite at w = " +
                             format_point(w) + "; truncation too coarse or |t| too close to 1");
  }
}

struct Integrals {
  double volume = 0.0;
  double volume_sub = 0.0;
  ComplexVec gram;
  ComplexVec gram_sub;
};

// Visits every multi-index of {0..grid-1}^n in lexicographic order.
template <class F>
void for_each_node(int n, int grid, F f) {
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    f(idx);
    int i = n - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == grid - 1) idx[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
  }
}

Integrals integrate(const AbelianFiber& fiber, const QuadratureOptions& opt, bool with_gram) {
  const ThetaContext& ctx = fiber.context();
  const int n = fiber.rank();
  const std::size_t nn = static_cast<std::size_t>(n);
  const int grid = opt.grid;
  if (grid < 8) throw ConfigError("quadrature grid must be at least 8");
  if (!opt.offset.empty() && opt.offset.size() != 2 * nn) throw ConfigError("grid offset needs 2n entries");
  auto shift = [&](std::size_t axis) { return opt.offset.empty() ? 0.0 : opt.offset[axis]; };
  const bool even = grid % 2 == 0;
  const std::size_t d = ctx.size();
  const std::size_t points = static_cast<std::size_t>(std::llround(std::pow(grid, n)));
  const double cell = fiber.jacobian() / std::pow(static_cast<double>(grid), 2 * n);
  const double cell_sub = cell * std::pow(2.0, 2 * n);

  std::vector<double> re_base(points * nn);
  std::vector<char> x_even(points);
  {
    std::size_t p = 0;
    for_each_node(n, grid, [&](const std::vector<int>& ix) {
      bool ev = true;
      for (std::size_t i = 0; i < nn; ++i) {
        re_base[p * nn + i] = (ix[i] + shift(i)) / grid;
        ev = ev && ix[i] % 2 == 0;
      }
      x_even[p++] = ev;
    });
  }

  std::vector<double> vol_slab, vol_sub_slab;
  std::vector<ComplexVec> gram_slab, gram_sub_slab;
  const Complex tau_s = ctx.tau_s();
  const QForm& q = ctx.form();
  std::vector<double> re_w(points * nn), im_w(nn), y(nn);
  ComplexVec w(nn);
  for_each_node(n, grid, [&](const std::vector<int>& iy) {
    bool y_even = true;
    for (std::size_t i = 0; i < nn; ++i) {
      y[i] = (iy[i] + shift(nn + i)) / grid;
      y_even = y_even && iy[i] % 2 == 0;
    }
    std::vector<double> re_shift(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
      double zy = 0.0;
      for (std::size_t j = 0; j < nn; ++j) zy += static_cast<double>(q(static_cast<int>(i), static_cast<int>(j))) * y[j];
      im_w[i] = tau_s.imag() * zy;
      re_shift[i] = tau_s.real() * zy;
    }
    for (std::size_t p = 0; p < points; ++p)
      for (std::size_t i = 0; i < nn; ++i) re_w[p * nn + i] = re_base[p * nn + i] + re_shift[i];
    const ThetaBatch b = theta_slab(ctx, im_w, re_w, true, opt.isa);

    double vol = 0.0, vol_sub = 0.0;
    ComplexVec gram(with_gram ? d * d : 0), gram_sub(with_gram ? d * d : 0);
    for (std::size_t p = 0; p < points; ++p) {
      const LocalForm f = local_form(b, p);
      for (std::size_t i = 0; i < nn; ++i) w[i] = {re_w[p * nn + i], im_w[i]};
      check_positive(f, w);
      const double dens = real_det(f.h);
      const bool sub = even && y_even && x_even[p];
      vol += dens;
      if (sub) vol_sub += dens;
      if (!with_gram) continue;
      const double wgt = dens / f.s;
      for (std::size_t m = 0; m < d; ++m) {
        const Complex vm = b.value(m, p) * wgt;
        for (std::size_t m2 = 0; m2 < d; ++m2) {
          const Complex c = vm * std::conj(b.value(m2, p));
          gram[m * d + m2] += c;
          if (sub) gram_sub[m * d + m2] += c;
        }
      }
    }
    vol_slab.push_back(vol);
    vol_sub_slab.push_back(vol_sub);
    if (with_gram) {
      gram_slab.push_back(std::move(gram));
      gram_sub_slab.push_back(std::move(gram_sub));
    }
  });

  Integrals out;
  out.volume = cell * pairwise_sum<double>(vol_slab);
  out.volume_sub = even ? cell_sub * pairwise_sum<double>(vol_sub_slab) : std::numeric_limits<double>::quiet_NaN();
  if (with_gram) {
    out.gram.resize(d * d);
    out.gram_sub.resize(d * d);
    ComplexVec col(gram_slab.size());
    for (std::size_t e = 0; e < d * d; ++e) {
      for (std::size_t s = 0; s < col.size(); ++s) col[s] = gram_slab[s][e];
      out.gram[e] = cell * pairwise_sum<Complex>(col);
      for (std::size_t s = 0; s < col.size(); ++s) col[s] = gram_sub_slab[s][e];
      out.gram_sub[e] = cell_sub * pairwise_sum<Complex>(col);
    }
  }
  return out;
}

}  // namespace

AbelianFiber::AbelianFiber(ThetaContext ctx) : ctx_(std::move(ctx)) {}

AbelianFiber::AbelianFiber(const QForm& q, std::int64_t k, Complex t, ThetaOptions options)
    : ctx_(q, k, t, options) {}

ComplexVec AbelianFiber::point(std::span<const double> x, std::span<const double> y) const {
  const std::size_t n = static_cast<std::size_t>(rank());
  if (x.size() != n || y.size() != n) throw ConfigError("fiber coordinates have wrong dimension");
  const Complex tau_s = ctx_.tau_s();
  ComplexVec w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double zy = 0.0;
    for (std::size_t j = 0; j < n; ++j) zy += static_cast<double>(ctx_.form()(static_cast<int>(i), static_cast<int>(j))) * y[j];
    w[i] = x[i] + tau_s * zy;
  }
  return w;
}

void AbelianFiber::coordinates(std::span<const Complex> w, std::span<double> x, std::span<double> y) const {
  const std::size_t n = static_cast<std::size_t>(rank());
  if (w.size() != n || x.size() != n || y.size() != n) throw ConfigError("fiber coordinates have wrong dimension");
  const Complex tau_s = ctx_.tau_s();
  const RatMat& zinv = ctx_.form().inverse();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += to_double(zinv[i][j]) * w[j].imag();
    y[i] = v / tau_s.imag();
  }
  // x from the unreduced y; reducing y first would drop Re(tau_s) Z floor(y)
  for (std::size_t i = 0; i < n; ++i) {
    double zy = 0.0;
    for (std::size_t j = 0; j < n; ++j) zy += static_cast<double>(ctx_.form()(static_cast<int>(i), static_cast<int>(j))) * y[j];
    x[i] = w[i].real() - tau_s.real() * zy;
    x[i] -= std::floor(x[i]);
  }
  for (std::size_t i = 0; i < n; ++i) y[i] -= std::floor(y[i]);
}

double AbelianFiber::jacobian() const {
  return std::pow(std::abs(ctx_.tau_s().imag()), rank()) * to_double(ctx_.form().determinant());
}

double log_hermitian_weight(const ThetaContext& ctx, std::span<const double> im_w) {
  const std::size_t n = static_cast<std::size_t>(ctx.rank());
  if (im_w.size() != n) throw ConfigError("point has wrong dimension");
  const RatMat& zinv = ctx.form().inverse();
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) quad += im_w[i] * to_double(zinv[i][j]) * im_w[j];
  return 4.0 * kPi * kPi / ctx.log_t().real() * quad;
}

Eigen::MatrixXcd fs_kahler_matrix(const AbelianFiber& fiber, std::span<const Complex> w) {
  const std::size_t n = static_cast<std::size_t>(fiber.rank());
  if (w.size() != n) throw ConfigError("point has wrong dimension");
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = w[i].real();
    im[i] = w[i].imag();
  }
  const ThetaBatch b = theta_slab(fiber.context(), im, re, true);
  const LocalForm f = local_form(b, 0);
  check_positive(f, w);
  return f.h;
}

double fubini_volume(const AbelianFiber& fiber, const QuadratureOptions& options) {
  return integrate(fiber, options, false).volume;
}

double fubini_volume(const AbelianFiber& fiber, int grid) {
  QuadratureOptions o;
  o.grid = grid;
  return fubini_volume(fiber, o);
}

GramMatrix gram_matrix(const AbelianFiber& fiber, const QuadratureOptions& options) {
  const Integrals in = integrate(fiber, options, true);
  const auto d = static_cast<Eigen::Index>(fiber.context().size());
  GramMatrix g;
  g.grid = options.grid;
  g.volume = in.volume;
  g.entries.resize(d, d);
  double diff = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const std::size_t e = static_cast<std::size_t>(i * d + j);
      g.entries(i, j) = in.gram[e];
      diff = std::max(diff, std::abs(in.gram[e] - in.gram_sub[e]));
    }
  }
  g.estimated_error = options.grid % 2 == 0 ? diff : std::numeric_limits<double>::infinity();
  return g;
}

GramMatrix gram_matrix(const AbelianFiber& fiber, int grid) {
  QuadratureOptions o;
  o.grid = grid;
  return gram_matrix(fiber, o);
}

double balanced_defect(const Eigen::MatrixXcd& g) {
  if (g.rows() == 0 || g.rows() != g.cols()) throw ConfigError("Gram matrix must be square and nonempty");
  const double mean = g.trace().real() / static_cast<double>(g.rows());
  if (!(mean > 0.0)) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXcd dev = g - mean * Eigen::MatrixXcd::Identity(g.rows(), g.cols());
  return dev.norm() / mean;
}

double hermitian_norm_invariance(const AbelianFiber& fiber, const HeisenbergElement& g,
                                 std::span<const Complex> coeff, std::span<const Complex> samples) {
  const ThetaContext& ctx = fiber.context();
  const std::size_t n = static_cast<std::size_t>(ctx.rank());
  const std::size_t d = ctx.size();
  if (coeff.size() != d) throw ConfigError("coefficient vector has wrong length");
  if (samples.size() % n != 0) throw ConfigError("sample list length is not a multiple of n");
  if (g.k != ctx.level() || g.a.size() != n || g.b.size() != n) throw ConfigError("group element of another level");
  Eigen::VectorXcd c(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) c(static_cast<Eigen::Index>(i)) = coeff[i];
  const Eigen::VectorXcd gc = representation_matrix(g) * c;

  const Complex tau = ctx.tau();
  const LatticeVector za = ctx.form().apply(g.a);
  // log(h |f|^2) at w, f = sum c_m theta_m.
  auto log_norm = [&](const ComplexVec& w, const Eigen::VectorXcd& cf) {
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = w[i].real();
      im[i] = w[i].imag();
    }
    const ThetaBatch b = theta_slab(ctx, im, re, false);
    Complex f = 0.0;
    for (std::size_t m = 0; m < d; ++m) f += cf(static_cast<Eigen::Index>(m)) * b.value(m, 0);
    return log_hermitian_weight(ctx, im) + 2.0 * (std::log(std::abs(f)) + b.log_scale);
  };
  double worst = 0.0;
  for (std::size_t s = 0; s < samples.size() / n; ++s) {
    ComplexVec w(samples.begin() + static_cast<std::ptrdiff_t>(s * n), samples.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
    ComplexVec shifted = w;
    for (std::size_t i = 0; i < n; ++i)
      shifted[i] += tau * static_cast<double>(za[i]) + static_cast<double>(g.b[i]) / static_cast<double>(g.k);
    const double lhs = log_norm(w, gc);
    const double rhs = log_norm(shifted, c);
    worst = std::max(worst, std::abs(std::expm1(lhs - rhs)));
  }
  return worst;
}

int commutant_dimension(std::span<const Eigen::MatrixXcd> generators) {
  if (generators.empty()) throw ConfigError("commutant of an empty generator list");
  const Eigen::Index d = generators.front().rows();
  for (const auto& g : generators) {
    if (g.rows() != d || g.cols() != d) throw ConfigError("generators must be square of one size");
    if (!Eigen::FullPivLU<Eigen::MatrixXcd>(g).isInvertible()) throw ConfigError("singular generator");
  }
  // vec(A g - g A) = (g^T (x) I - I (x) g) vec(A), column-major vec.
  const Eigen::Index dd = d * d;
  Eigen::MatrixXcd sys = Eigen::MatrixXcd::Zero(dd * static_cast<Eigen::Index>(generators.size()), dd);
  for (std::size_t s = 0; s < generators.size(); ++s) {
    const auto& g = generators[s];
    const Eigen::Index r0 = static_cast<Eigen::Index>(s) * dd;
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        for (Eigen::Index i = 0; i < d; ++i) {
          sys(r0 + a * d + i, b * d + i) += g(b, a);
          sys(r0 + a * d + i, a * d + b) -= g(i, b);
        }
      }
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(sys);
  lu.setThreshold(1e-10);
  return static_cast<int>(dd - lu.rank());
}

double commutator_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& g) { return (a * g - g * a).norm(); }

}  // namespace thetabal
