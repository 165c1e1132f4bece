#include "thetabal/theta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "thetabal/error.hpp"
#include "thetabal/polytope.hpp"

namespace thetabal {

struct ThetaAccess {
  static double arg0(const ThetaContext& c) { return c.arg_reduced_; }
  static double log_abs_lo(const ThetaContext& c) { return c.log_abs_lo_; }
};

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoPiLo = 2.4492935982947064e-16;  // 2 pi - kTwoPi
constexpr int kMaxRadius = 4096;

double lambda_lower(const QForm& q) {
  // Round the rational bound down so the double stays a lower bound.
  return std::nextafter(to_double(q.min_eigenvalue_bound()), 0.0);
}

double shell_count(int r, int n) {
  return std::pow(2.0 * r + 1.0, n) - std::pow(2.0 * r - 1.0, n);
}

// Smallest R >= 1 whose tail sum_{r > R} term(r) is below eps; term(r) must be
// eventually log-concave and decreasing.
template <class Term>
int smallest_tail_radius(double eps, Term term) {
  std::vector<double> terms{0.0};
  auto value = [&](int r) {
    while (static_cast<int>(terms.size()) <= r) terms.push_back(term(static_cast<int>(terms.size())));
    return terms[static_cast<std::size_t>(r)];
  };
  for (int radius = 1; radius < kMaxRadius; ++radius) {
    double tail = 0.0;
    bool bounded = false;
    for (int r = radius + 1; r < kMaxRadius; ++r) {
      const double cur = value(r);
      tail += cur;
      if (!std::isfinite(tail)) break;
      const double next = value(r + 1);
      if (next <= 0.5 * cur && cur < 1e-3 * eps) {
        tail += 2.0 * next;  // geometric majorant of the remainder
        bounded = true;
        break;
      }
    }
    if (bounded && tail < eps) return radius;
  }
  throw CertificationError("truncation radius exceeds " + std::to_string(kMaxRadius) +
                           "; |t| too close to 1 or im_w_bound too large");
}

// theta mod 2 pi with the multiple of 2 pi removed in double-double.
double reduced_arg(double theta) {
  const double j = std::floor(theta / kTwoPi);
  double r = std::fma(-j, kTwoPi, theta) - j * kTwoPiLo;
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// hi + lo ~ a * b exactly

struct DD {
  double hi = 0.0, lo = 0.0;
};

DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

DD dd_add(DD a, DD b) {
  const double s = a.hi + b.hi;
  const double bb = s - a.hi;
  const double e = (a.hi - (s - bb)) + (b.hi - bb);
  return {s, e + a.lo + b.lo};
}

// arg0 * pb mod 2 pi in (-pi, pi]; the product is exact in double-double, so
// large exponents do not amplify the rounding of arg0 * pb.
double reduced_phase(double arg0, std::int64_t pb) {
  const DD x = two_prod(arg0, static_cast<double>(pb));
  const double j = std::nearbyint(x.hi / kTwoPi);
  return (std::fma(-j, kTwoPi, x.hi) - j * kTwoPiLo) + x.lo;
}

// exp(log|t| phi_bar - 2 pi <im, v> - shift), with the exponent kept in
// double-double so large arguments do not lose relative accuracy.
double term_magnitude(DD log_abs_t, std::int64_t pb, std::span<const double> im_w, const LatticeVector& v,
                      double shift) {
  DD bv;
  for (std::size_t i = 0; i < v.size(); ++i) bv = dd_add(bv, two_prod(im_w[i], static_cast<double>(v[i])));
  DD tw = two_prod(kTwoPi, bv.hi);
  tw.lo += kTwoPi * bv.lo + kTwoPiLo * bv.hi;
  DD x = two_prod(log_abs_t.hi, static_cast<double>(pb));
  x.lo += log_abs_t.lo * static_cast<double>(pb);
  x = dd_add(x, DD{-tw.hi, -tw.lo});
  x = dd_add(x, DD{-shift, 0.0});
  return std::exp(x.hi) * (1.0 + x.lo);
}

void check_point(const ThetaContext& ctx, std::span<const Complex> w) {
  if (w.size() != static_cast<std::size_t>(ctx.rank())) throw ConfigError("point has wrong dimension");
  const double bound = ctx.options().im_w_bound;
  for (const auto& wi : w) {
    if (!std::isfinite(wi.real()) || !std::isfinite(wi.imag())) throw ConfigError("non-finite point");
    if (std::abs(wi.imag()) > bound * (1.0 + 1e-12) + 1e-15) {
      throw ConfigError("|Im w| = " + std::to_string(std::abs(wi.imag())) + " exceeds im_w_bound " +
                        std::to_string(bound) + "; use a context with a larger im_w_bound");
    }
  }
}

// Lattice terms of a box window, laid out for the kernel. Coefficients carry
// the full Gaussian magnitude |t|^{phi_bar} e^{-2 pi <Im w, v>} divided by
// exp(shift), so the phase tables only hold unit complex numbers.
struct TermTable {
  int dim = 0;
  std::vector<std::int64_t> lo;  // smallest exponent per axis
  std::vector<std::size_t> rows;
  std::vector<std::int32_t> residue;
  std::vector<std::int32_t> exponent;
  std::vector<double> coef_re, coef_im, grad_scale;

  std::size_t count() const { return residue.size(); }
};

TermTable build_terms(const ThetaContext& ctx, double arg0, const LatticeVector& centre, int radius,
                      std::span<const double> im_w, double shift, const std::optional<LatticeVector>& only) {
  const QForm& q = ctx.form();
  const int n = q.rank();
  const std::int64_t k = ctx.level();
  const DD log_abs_t{ctx.log_t().real(), ThetaAccess::log_abs_lo(ctx)};
  TermTable tab;
  tab.dim = n;
  tab.lo.resize(static_cast<std::size_t>(n));
  tab.rows.assign(static_cast<std::size_t>(n), static_cast<std::size_t>(2 * radius + 1));
  for (int i = 0; i < n; ++i) tab.lo[static_cast<std::size_t>(i)] = centre[static_cast<std::size_t>(i)] - radius;
  const LatticeVector target = only ? reduce_mod(k, *only) : LatticeVector{};

  LatticeVector u(static_cast<std::size_t>(n), -radius);
  LatticeVector v(static_cast<std::size_t>(n));
  while (true) {
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = centre[static_cast<std::size_t>(i)] + u[static_cast<std::size_t>(i)];
    const LatticeVector red = reduce_mod(k, v);
    if (!only || red == target) {
      const std::int64_t pb = phi_bar(q, v);
      const double mag = term_magnitude(log_abs_t, pb, im_w, v, shift);
      const double ang = reduced_phase(arg0, pb);
      tab.residue.push_back(only ? 0 : static_cast<std::int32_t>(residue_index(k, red)));
      tab.coef_re.push_back(mag * std::cos(ang));
      tab.coef_im.push_back(mag * std::sin(ang));
      for (int i = 0; i < n; ++i) {
        tab.exponent.push_back(static_cast<std::int32_t>(u[static_cast<std::size_t>(i)] + radius));
        tab.grad_scale.push_back(kTwoPi * static_cast<double>(v[static_cast<std::size_t>(i)]));
      }
    }
    int i = n - 1;
    while (i >= 0 && u[static_cast<std::size_t>(i)] == radius) u[static_cast<std::size_t>(i--)] = -radius;
    if (i < 0) break;
    ++u[static_cast<std::size_t>(i)];
  }
  return tab;
}

// Runs the kernel over real parts re_w (count x n).
ThetaBatch run_terms(const TermTable& tab, std::size_t functions, std::span<const double> re_w, std::size_t count,
                     bool with_grad, kernels::Isa isa) {
  const int n = tab.dim;
  const std::size_t np = (count + 3) / 4 * 4;
  std::vector<std::size_t> offset(static_cast<std::size_t>(n));
  std::size_t total_rows = 0;
  for (int i = 0; i < n; ++i) {
    offset[static_cast<std::size_t>(i)] = total_rows;
    total_rows += tab.rows[static_cast<std::size_t>(i)];
  }
  std::vector<double> ph_re(total_rows * np, 0.0), ph_im(total_rows * np, 0.0);
  std::vector<std::pair<double, std::size_t>> order(count);
  std::vector<double> cr, ci;
  for (int i = 0; i < n; ++i) {
    // Tensor grids repeat each coordinate; evaluate sin/cos once per distinct value.
    for (std::size_t p = 0; p < count; ++p) order[p] = {re_w[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)], p};
    std::sort(order.begin(), order.end());
    for (std::size_t r = 0; r < tab.rows[static_cast<std::size_t>(i)]; ++r) {
      const double j = static_cast<double>(tab.lo[static_cast<std::size_t>(i)] + static_cast<std::int64_t>(r));
      double* pr = ph_re.data() + (offset[static_cast<std::size_t>(i)] + r) * np;
      double* pi = ph_im.data() + (offset[static_cast<std::size_t>(i)] + r) * np;
      for (std::size_t q = 0; q < count; ++q) {
        const std::size_t p = order[q].second;
        if (q > 0 && order[q].first == order[q - 1].first) {
          pr[p] = pr[order[q - 1].second];
          pi[p] = pi[order[q - 1].second];
          continue;
        }
        const double x = order[q].first;
        // Reduce the integer part of x first so j * x stays accurate.
        const double frac = x - std::floor(x);
        const DD jx = two_prod(j, frac);
        const double ang = kTwoPi * (std::remainder(jx.hi, 1.0) + jx.lo);
        pr[p] = std::cos(ang);
        pi[p] = std::sin(ang);
      }
    }
  }
  std::vector<double> acc_re(functions * np, 0.0), acc_im(functions * np, 0.0);
  std::vector<double> g_re, g_im;
  if (with_grad) {
    g_re.assign(functions * static_cast<std::size_t>(n) * np, 0.0);
    g_im.assign(functions * static_cast<std::size_t>(n) * np, 0.0);
  }
  kernels::TermView tv{tab.count(), n, tab.residue.data(), tab.exponent.data(), tab.coef_re.data(),
                       tab.coef_im.data(), tab.grad_scale.data()};
  kernels::PhaseView pv{np, n, offset.data(), ph_re.data(), ph_im.data()};
  kernels::AccumulatorView av{np, acc_re.data(), acc_im.data(), with_grad ? g_re.data() : nullptr,
                              with_grad ? g_im.data() : nullptr};
  kernels::accumulate(isa, tv, pv, av);

  ThetaBatch out;
  out.points = count;
  out.functions = functions;
  out.dim = n;
  out.values.resize(functions * count);
  for (std::size_t m = 0; m < functions; ++m)
    for (std::size_t p = 0; p < count; ++p) out.values[m * count + p] = {acc_re[m * np + p], acc_im[m * np + p]};
  if (with_grad) {
    out.grads.resize(functions * static_cast<std::size_t>(n) * count);
    for (std::size_t row = 0; row < functions * static_cast<std::size_t>(n); ++row)
      for (std::size_t p = 0; p < count; ++p) out.grads[row * count + p] = {g_re[row * np + p], g_im[row * np + p]};
  }
  return out;
}

ThetaBatch eval_centred(const ThetaContext& ctx, double arg0, std::span<const Complex> w, bool with_grad,
                        const std::optional<LatticeVector>& only, kernels::Isa isa) {
  check_point(ctx, w);
  const int n = ctx.rank();
  std::vector<double> im(static_cast<std::size_t>(n)), re(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    im[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)].imag();
    re[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)].real();
  }
  const TermTable tab =
      build_terms(ctx, arg0, LatticeVector(static_cast<std::size_t>(n), 0), ctx.radius(), im, 0.0, only);
  return run_terms(tab, only ? 1 : ctx.size(), re, 1, with_grad, isa);
}

}  // namespace

ThetaContext::ThetaContext(QForm q, std::int64_t k, Complex t, ThetaOptions options)
    : ThetaContext(std::move(q), k,
                   [&] {
                     const double a = std::abs(t);
                     if (!(a > 0.0 && a < 1.0)) throw ConfigError("t must satisfy 0 < |t| < 1");
                     double arg = std::arg(t);
                     if (arg < 0.0) arg += kTwoPi;
                     if (arg >= kTwoPi) arg = 0.0;
                     return Complex(std::log(a), arg);
                   }(),
                   options, true) {
  const long double a = std::abs(t);
  log_abs_lo_ = static_cast<double>(std::log(a) - static_cast<long double>(log_t_.real()));
}

ThetaContext ThetaContext::with_log_t(QForm q, std::int64_t k, Complex log_t, ThetaOptions options) {
  return ThetaContext(std::move(q), k, log_t, options, true);
}

ThetaContext::ThetaContext(QForm q, std::int64_t k, Complex log_t, ThetaOptions options, bool)
    : q_(std::move(q)), k_(k), t_(std::exp(log_t)), log_t_(log_t), arg_reduced_(reduced_arg(log_t.imag())),
      options_(options), radius_(0) {
  if (k_ < 1) throw ConfigError("level k must be positive");
  if (!(log_t.real() < 0.0) || !std::isfinite(log_t.real()) || !std::isfinite(log_t.imag()))
    throw ConfigError("t must satisfy 0 < |t| < 1");
  if (!(options_.truncation_eps > 0.0)) throw ConfigError("truncation_eps must be positive");
  if (!(options_.im_w_bound >= 0.0)) throw ConfigError("im_w_bound must be nonnegative");
  radius_ = truncation_radius(q_, t_, options_.truncation_eps, options_.im_w_bound);
}

Complex ThetaContext::tau() const { return log_t_ / Complex(0.0, kTwoPi); }

ThetaContext ThetaContext::with_options(ThetaOptions options) const {
  return ThetaContext(q_, k_, log_t_, options, true);
}

int truncation_radius(const QForm& q, Complex t, double eps, double im_w_bound) {
  const double a = std::abs(t);
  if (!(a > 0.0 && a < 1.0)) throw ConfigError("t must satisfy 0 < |t| < 1");
  if (!(eps > 0.0)) throw ConfigError("truncation_eps must be positive");
  if (!(im_w_bound >= 0.0)) throw ConfigError("im_w_bound must be nonnegative");
  const int n = q.rank();
  const double half_decay = 0.5 * lambda_lower(q) * std::log(a);
  return smallest_tail_radius(eps, [&](int r) {
    const double rr = r;
    return shell_count(r, n) * std::exp(half_decay * rr * rr + kTwoPi * im_w_bound * n * rr) * (1.0 + kTwoPi * rr);
  });
}

int truncation_radius(const ThetaContext& ctx) { return ctx.radius(); }

int slab_radius(const QForm& q, Complex t, double eps, std::int64_t centre_norm) {
  const int n = q.rank();
  const double half_decay = 0.5 * lambda_lower(q) * std::log(std::abs(t));
  return smallest_tail_radius(eps, [&](int r) {
    const double d = r - 0.5;
    return shell_count(r, n) * std::exp(half_decay * d * d) *
           (1.0 + kTwoPi * (static_cast<double>(centre_norm) + r));
  });
}

Complex theta_eval(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w) {
  if (m.size() != static_cast<std::size_t>(ctx.rank())) throw ConfigError("index has wrong dimension");
  return eval_centred(ctx, ThetaAccess::arg0(ctx), w, false, m, kernels::active_isa()).values[0];
}

ComplexVec theta_grad(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w) {
  if (m.size() != static_cast<std::size_t>(ctx.rank())) throw ConfigError("index has wrong dimension");
  const ThetaBatch b = eval_centred(ctx, ThetaAccess::arg0(ctx), w, true, m, kernels::active_isa());
  return b.grads;
}

ComplexVec theta_vector(const ThetaContext& ctx, std::span<const Complex> w) {
  return eval_centred(ctx, ThetaAccess::arg0(ctx), w, false, std::nullopt, kernels::active_isa()).values;
}

ThetaBatch theta_batch(const ThetaContext& ctx, std::span<const Complex> w, bool with_grad, kernels::Isa isa) {
  const std::size_t n = static_cast<std::size_t>(ctx.rank());
  if (w.size() % n != 0) throw ConfigError("point list length is not a multiple of n");
  const std::size_t count = w.size() / n;
  ThetaBatch out;
  out.points = count;
  out.functions = ctx.size();
  out.dim = ctx.rank();
  out.values.resize(out.functions * count);
  if (with_grad) out.grads.resize(out.functions * n * count);
  for (std::size_t p = 0; p < count; ++p) {
    const ThetaBatch one = eval_centred(ctx, ThetaAccess::arg0(ctx), w.subspan(p * n, n), with_grad, std::nullopt, isa);
    for (std::size_t m = 0; m < out.functions; ++m) out.values[m * count + p] = one.values[m];
    for (std::size_t row = 0; with_grad && row < out.functions * n; ++row) out.grads[row * count + p] = one.grads[row];
  }
  return out;
}

ThetaBatch theta_slab(const ThetaContext& ctx, std::span<const double> im_w, std::span<const double> re_w,
                      bool with_grad, kernels::Isa isa) {
  const QForm& q = ctx.form();
  const int n = q.rank();
  const std::size_t nn = static_cast<std::size_t>(n);
  if (im_w.size() != nn || re_w.size() % nn != 0) throw ConfigError("slab has wrong dimension");
  const double log_abs_t = ctx.log_t().real();
  // Peak of E(v) = log|t| phi_bar(v) - 2 pi <b, v>: v0 = (2 pi / log|t|) Z^{-1} b.
  std::vector<double> v0(nn, 0.0);
  const RatMat& zinv = q.inverse();
  for (std::size_t i = 0; i < nn; ++i) {
    for (std::size_t j = 0; j < nn; ++j) v0[i] += to_double(zinv[i][j]) * im_w[j];
    v0[i] *= kTwoPi / log_abs_t;
  }
  LatticeVector centre(nn);
  std::int64_t centre_norm = 0;
  double peak = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    centre[i] = static_cast<std::int64_t>(std::llround(v0[i]));
    centre_norm = std::max<std::int64_t>(centre_norm, std::abs(centre[i]));
    peak -= kTwoPi * im_w[i] * v0[i];
    for (std::size_t j = 0; j < nn; ++j)
      peak += 0.5 * log_abs_t * static_cast<double>(q(static_cast<int>(i), static_cast<int>(j))) * v0[i] * v0[j];
  }
  const int radius = slab_radius(q, ctx.t(), ctx.options().truncation_eps, centre_norm);
  const TermTable tab = build_terms(ctx, ThetaAccess::arg0(ctx), centre, radius, im_w, peak, std::nullopt);
  ThetaBatch out = run_terms(tab, ctx.size(), re_w, re_w.size() / nn, with_grad, isa);
  out.log_scale = peak;
  return out;
}

double quasi_periodicity_defect(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w,
                                const LatticeVector& mu, const LatticeVector& p) {
  const QForm& q = ctx.form();
  const std::size_t n = static_cast<std::size_t>(q.rank());
  if (mu.size() != n || p.size() != n) throw ConfigError("period has wrong dimension");
  const Complex tau_s = ctx.tau_s();
  const LatticeVector zp = q.apply(p);
  ComplexVec shifted(w.begin(), w.end());
  Complex wp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    shifted[i] += static_cast<double>(mu[i]) + tau_s * static_cast<double>(zp[i]);
    wp += w[i] * static_cast<double>(p[i]);
  }
  const double k = static_cast<double>(ctx.level());
  const Complex factor =
      std::exp(Complex(0.0, k * std::numbers::pi) * (-2.0 * wp - tau_s * static_cast<double>(q.bilinear(p, p))));
  const Complex lhs = theta_eval(ctx, m, shifted), rhs = theta_eval(ctx, m, w) * factor;
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

HeisenbergElement HeisenbergElement::operator*(const HeisenbergElement& o) const {
  if (k != o.k || a.size() != o.a.size()) throw ConfigError("Heisenberg elements of different groups");
  LatticeVector sa(a.size()), sb(b.size());
  std::int64_t pairing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa[i] = a[i] + o.a[i];
    sb[i] = b[i] + o.b[i];
    pairing += b[i] * o.a[i];
  }
  const std::int64_t z = ((zeta + o.zeta + pairing) % k + k) % k;
  return {k, z, reduce_mod(k, sa), reduce_mod(k, sb)};
}

HeisenbergElement heisenberg_identity(std::int64_t k, int n) {
  return {k, 0, LatticeVector(static_cast<std::size_t>(n), 0), LatticeVector(static_cast<std::size_t>(n), 0)};
}

std::vector<std::size_t> heisenberg_translate(std::int64_t k, const LatticeVector& a) {
  const int n = static_cast<int>(a.size());
  const std::size_t count = residue_count(k, n);
  std::vector<std::size_t> perm(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    LatticeVector m = residue_from_index(k, n, idx);
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)];
    perm[idx] = residue_index(k, m);
  }
  return perm;
}

ComplexVec heisenberg_phase(std::int64_t k, const LatticeVector& b) {
  const int n = static_cast<int>(b.size());
  const std::size_t count = residue_count(k, n);
  ComplexVec phase(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const LatticeVector m = residue_from_index(k, n, idx);
    std::int64_t s = 0;
    for (int i = 0; i < n; ++i) s += b[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
    s = ((s % k) + k) % k;
    phase[idx] = std::polar(1.0, kTwoPi * static_cast<double>(s) / static_cast<double>(k));
  }
  return phase;
}

Eigen::MatrixXcd translate_matrix(std::int64_t k, const LatticeVector& a) {
  const auto perm = heisenberg_translate(k, a);
  const auto d = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t col = 0; col < perm.size(); ++col) t(static_cast<Eigen::Index>(perm[col]), static_cast<Eigen::Index>(col)) = 1.0;
  return t;
}

Eigen::MatrixXcd phase_matrix(std::int64_t k, const LatticeVector& b) {
  const auto ph = heisenberg_phase(k, b);
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(ph.size()));
  for (std::size_t i = 0; i < ph.size(); ++i) diag(static_cast<Eigen::Index>(i)) = ph[i];
  return diag.asDiagonal();
}

Eigen::MatrixXcd representation_matrix(const HeisenbergElement& g) {
  const Complex z = std::polar(1.0, kTwoPi * static_cast<double>(g.zeta) / static_cast<double>(g.k));
  return z * translate_matrix(g.k, g.a) * phase_matrix(g.k, g.b);
}

std::vector<Eigen::MatrixXcd> heisenberg_generators(std::int64_t k, int n) {
  std::vector<Eigen::MatrixXcd> gens;
  for (int i = 0; i < n; ++i) {
    LatticeVector e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i)] = 1;
    gens.push_back(translate_matrix(k, e));
    gens.push_back(phase_matrix(k, e));
  }
  return gens;
}

bool in_cone(const PeriodicSubdivision& s, const MonomialTerm& term) {
  if (term.m.size() != static_cast<std::size_t>(s.rank())) throw ConfigError("monomial has wrong dimension");
  if (term.l < 0) return false;
  if (term.l == 0) {
    // phi grows quadratically, so the recession cone is the vertical ray.
    return term.r >= 0 && std::all_of(term.m.begin(), term.m.end(), [](std::int64_t x) { return x == 0; });
  }
  RatVec y = to_rational(term.m);
  for (auto& c : y) c /= static_cast<long>(term.l);
  return Rational(static_cast<long>(term.r)) >= Rational(static_cast<long>(term.l)) * eval_phi(s, y);
}

namespace {

struct VertexCone {
  std::vector<LatticeVector> edges;  // primitive edge directions from the vertex
  RatVec slope;
};

std::vector<VertexCone> vertex_cones(const PeriodicSubdivision& s, const LatticeVector& p) {
  const int n = s.rank();
  std::vector<VertexCone> cones;
  for (const Cell& cell : s.star_at(p)) {
    std::vector<RatVec> pts;
    std::size_t at = cell.vertices.size();
    for (std::size_t i = 0; i < cell.vertices.size(); ++i) {
      pts.push_back(to_rational(cell.vertices[i]));
      if (cell.vertices[i] == p) at = i;
    }
    VertexCone cone;
    cone.slope = cell.affine->slope;
    for (const auto& face : polytope::faces(pts)) {
      if (face.size() != 2 || std::find(face.begin(), face.end(), at) == face.end()) continue;
      const std::size_t other = face[0] == at ? face[1] : face[0];
      LatticeVector e(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = cell.vertices[other][static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)];
      cone.edges.push_back(e);
    }
    RatMat basis(static_cast<std::size_t>(n), RatVec(static_cast<std::size_t>(n)));
    if (cone.edges.size() == static_cast<std::size_t>(n)) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = static_cast<long>(cone.edges[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    }
    if (cone.edges.size() != static_cast<std::size_t>(n) || abs(determinant(basis)) != 1) {
      throw ConfigError("monomial_expansion needs unimodular vertex cones; this decomposition has a non-simplicial or non-unimodular cell at the vertex");
    }
    cones.push_back(std::move(cone));
  }
  return cones;
}

}  // namespace

LocalExpansion monomial_expansion(const PeriodicSubdivision& s, const RatVec& vertex, const LatticeVector& m,
                                  int order) {
  const int n = s.rank();
  const std::size_t nn = static_cast<std::size_t>(n);
  if (vertex.size() != nn || m.size() != nn) throw ConfigError("dimension mismatch");
  if (order < 0) throw ConfigError("order must be nonnegative");
  LatticeVector p(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    if (!is_integer(vertex[i])) throw ConfigError("vertex is not a 0-cell of the decomposition");
    p[i] = vertex[i].get_num().get_si();
  }
  const QForm& q = s.form();
  const std::int64_t k = s.level();
  const auto cones = vertex_cones(s, p);

  LocalExpansion out;
  std::vector<LatticeVector> edges;
  for (const auto& c : cones)
    for (const auto& e : c.edges)
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
  std::sort(edges.begin(), edges.end(), std::greater<>());
  const std::int64_t phi_p = phi_bar(q, p);
  for (const auto& e : edges) {
    const auto& cone = *std::find_if(cones.begin(), cones.end(), [&](const VertexCone& c) {
      return std::find(c.edges.begin(), c.edges.end(), e) != c.edges.end();
    });
    LatticeVector lifted = e;
    lifted.push_back(dot(cone.slope, to_rational(e)).get_num().get_si());
    out.generators.push_back(lifted);
  }

  // Window centred on the representative of m nearest the vertex, so the
  // result depends only on m mod k.
  LatticeVector centre(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    std::int64_t r = ((m[i] - p[i]) % k + k) % k;
    if (2 * r > k) r -= k;
    centre[i] = p[i] + r;
  }
  LatticeVector nu(nn, -order);
  while (true) {
    LatticeVector v(nn), u(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      v[i] = centre[i] + k * nu[i];
      u[i] = v[i] - p[i];
    }
    const std::int64_t phi_v = phi_bar(q, v);
    bool placed = false;
    for (const auto& cone : cones) {
      RatMat basis(nn, RatVec(nn));
      for (std::size_t i = 0; i < nn; ++i)
        for (std::size_t j = 0; j < nn; ++j) basis[i][j] = static_cast<long>(cone.edges[j][i]);
      RatVec coeff;
      if (!solve(basis, to_rational(u), coeff)) continue;
      if (std::any_of(coeff.begin(), coeff.end(), [](const Rational& c) { return sgn(c) < 0; })) continue;
      ExpansionTerm term;
      term.monomial = {v, phi_v, 1};
      term.z_exps.assign(edges.size(), 0);
      for (std::size_t j = 0; j < nn; ++j) {
        const auto pos = static_cast<std::size_t>(std::find(edges.begin(), edges.end(), cone.edges[j]) - edges.begin());
        term.z_exps[pos] = coeff[j].get_num().get_si();
      }
      term.t_exp = phi_v - phi_p - dot(cone.slope, to_rational(u)).get_num().get_si();
      out.terms.push_back(std::move(term));
      placed = true;
      break;
    }
    if (!placed) throw CertificationError("lattice point outside every vertex cone; star of the vertex is incomplete");
    std::size_t i = nn;
    while (i > 0 && nu[i - 1] == order) nu[--i] = -order;
    if (i == 0) break;
    ++nu[i - 1];
  }
  std::sort(out.terms.begin(), out.terms.end(), [](const ExpansionTerm& a, const ExpansionTerm& b) {
    return std::tie(a.t_exp, a.z_exps) < std::tie(b.t_exp, b.z_exps);
  });
  return out;
}

bool restricts_nonzero(const PeriodicSubdivision& s, const Cell& top, const LatticeVector& m) {
  const LatticeVector target = reduce_mod(s.level(), m);
  return std::any_of(top.vertices.begin(), top.vertices.end(),
                     [&](const LatticeVector& v) { return reduce_mod(s.level(), v) == target; });
}

}  // namespace thetabal
