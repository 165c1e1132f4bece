#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thetabal/kernels/theta_kernel.hpp"
#include "thetabal/lattice.hpp"
#include "thetabal/subdivision.hpp"

namespace thetabal {

using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;

struct ThetaOptions {
  double truncation_eps = 1e-12;
  double im_w_bound = 1.0;
};

/// Level-k theta functions of the principally polarized family over the
/// punctured disc, at the parameter t. Immutable.
///
///   theta_m(w) = sum_{v = m mod k} t^{phi_bar(v)} exp(2 pi i <w, v>)
///
/// t^{phi_bar(v)} is taken as exp(phi_bar(v) log t) with the integer exponent
/// phi_bar(v), so the branch of log t only matters modulo 2 pi i.
class ThetaContext {
 public:
  /// log t is taken with imaginary part arg(t) in [0, 2 pi).
  ThetaContext(QForm q, std::int64_t k, Complex t, ThetaOptions options = {});
  /// Explicit branch; exp(log_t) must lie in the punctured unit disc.
  static ThetaContext with_log_t(QForm q, std::int64_t k, Complex log_t, ThetaOptions options = {});

  const QForm& form() const { return q_; }
  std::int64_t level() const { return k_; }
  int rank() const { return q_.rank(); }
  Complex t() const { return t_; }
  Complex log_t() const { return log_t_; }
  /// log t / (2 pi i).
  Complex tau() const;
  /// log s / (2 pi i) with log s = k log t: the period of the fiber X_s.
  Complex tau_s() const { return static_cast<double>(k_) * tau(); }
  const ThetaOptions& options() const { return options_; }
  /// Certified lattice radius for values and gradients in the Im-band.
  int radius() const { return radius_; }
  std::size_t size() const { return residue_count(k_, rank()); }

  /// Same data with another truncation policy.
  ThetaContext with_options(ThetaOptions options) const;

 private:
  ThetaContext(QForm q, std::int64_t k, Complex log_t, ThetaOptions options, bool);

  QForm q_;
  std::int64_t k_;
  Complex t_;
  Complex log_t_;
  double arg_reduced_;
  double log_abs_lo_ = 0.0;  // log|t| - Re log_t when built from t
  ThetaOptions options_;
  int radius_;

  friend struct ThetaAccess;
};

/// Smallest R with sum_{|v|_inf > R} |t|^{phi_bar(v)} e^{2 pi B |v|_1} (1 + 2 pi |v|_inf) < eps.
int truncation_radius(const QForm& q, Complex t, double eps, double im_w_bound);
int truncation_radius(const ThetaContext& ctx);

Complex theta_eval(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w);
ComplexVec theta_grad(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w);

/// All k^n values at w, in residue_index order.
ComplexVec theta_vector(const ThetaContext& ctx, std::span<const Complex> w);

/// Values and gradients of all k^n thetas on a batch of points.
struct ThetaBatch {
  std::size_t points = 0;
  std::size_t functions = 0;
  int dim = 0;
  ComplexVec values;  // [m * points + p]
  ComplexVec grads;   // [(m * dim + i) * points + p], empty without gradients
  /// Slab evaluation only: true values are exp(log_scale) times the stored ones.
  double log_scale = 0.0;

  Complex value(std::size_t m, std::size_t p) const { return values[m * points + p]; }
  Complex grad(std::size_t m, int i, std::size_t p) const {
    return grads[(m * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)) * points + p];
  }
};

/// Points given row-major (count x n). Each entry is computed independently of
/// the others, so results do not depend on batching.
ThetaBatch theta_batch(const ThetaContext& ctx, std::span<const Complex> w, bool with_grad,
                       kernels::Isa isa = kernels::active_isa());

/// Points sharing Im w = im_w; real parts row-major (count x n). The lattice
/// window is centred on the Gaussian peak of the series for this Im w, with a
/// radius certified relative to the peak, and values are rescaled by the peak
/// (see ThetaBatch::log_scale). Used by quadrature over the fiber.
ThetaBatch theta_slab(const ThetaContext& ctx, std::span<const double> im_w, std::span<const double> re_w,
                      bool with_grad, kernels::Isa isa = kernels::active_isa());

/// Relative-to-peak radius used by theta_slab.
int slab_radius(const QForm& q, Complex t, double eps, std::int64_t centre_norm);

/// |lhs - rhs| / max(1, |lhs|, |rhs|) for lhs = theta_m(w + mu + tau_s Z p),
/// rhs = theta_m(w) exp(k pi i (-2 <w,p> - tau_s Z(p,p))). The shifted point can
/// sit far out in the Im band where values are exponentially large.
double quasi_periodicity_defect(const ThetaContext& ctx, const LatticeVector& m, std::span<const Complex> w,
                                const LatticeVector& mu, const LatticeVector& p);

/// Element (zeta^c, a, b) of the finite Heisenberg group; c mod k, a mod kM, b mod kN.
struct HeisenbergElement {
  std::int64_t k = 1;
  std::int64_t zeta = 0;
  LatticeVector a;
  LatticeVector b;

  HeisenbergElement operator*(const HeisenbergElement& o) const;
  friend bool operator==(const HeisenbergElement&, const HeisenbergElement&) = default;
};

HeisenbergElement heisenberg_identity(std::int64_t k, int n);

/// perm[index(m)] = index(m + a).
std::vector<std::size_t> heisenberg_translate(std::int64_t k, const LatticeVector& a);
/// phase[index(m)] = exp(2 pi i <b, m> / k).
ComplexVec heisenberg_phase(std::int64_t k, const LatticeVector& b);

/// Matrix of T_a on the theta basis: column m has a one in row m + a.
Eigen::MatrixXcd translate_matrix(std::int64_t k, const LatticeVector& a);
Eigen::MatrixXcd phase_matrix(std::int64_t k, const LatticeVector& b);
/// zeta^c T_a S_b; multiplicative for the group law.
Eigen::MatrixXcd representation_matrix(const HeisenbergElement& g);
/// T_{e_i} and S_{e_i} for every coordinate direction.
std::vector<Eigen::MatrixXcd> heisenberg_generators(std::int64_t k, int n);

/// Monomial Z^{(m, r, l)} of the graded ring of the degeneration.
struct MonomialTerm {
  LatticeVector m;
  std::int64_t r = 0;
  std::int64_t l = 1;
};

/// (m, r, l) lies in the cone over the upper graph of phi.
bool in_cone(const PeriodicSubdivision& s, const MonomialTerm& term);

/// One series term in a toric chart at a vertex.
struct ExpansionTerm {
  MonomialTerm monomial;             // (m + gamma, phi_bar(m + gamma), 1)
  std::vector<std::int64_t> z_exps;  // exponents of the chart's edge coordinates
  std::int64_t t_exp = 0;

  friend bool operator==(const ExpansionTerm& a, const ExpansionTerm& b) {
    return a.z_exps == b.z_exps && a.t_exp == b.t_exp;
  }
};

struct LocalExpansion {
  /// Lifted primitive edges (e, <slope, e>) at the vertex, one per coordinate
  /// z_j, in decreasing lexicographic order of e; t is the extra coordinate.
  std::vector<LatticeVector> generators;
  std::vector<ExpansionTerm> terms;
};

/// Terms of theta_m at v = c + k nu, |nu|_inf <= order, c the representative of
/// m mod k nearest `vertex`, written in the chart at `vertex`. Requires unimodular vertex cones. Sorted by (t_exp, z_exps).
LocalExpansion monomial_expansion(const PeriodicSubdivision& s, const RatVec& vertex, const LatticeVector& m,
                                  int order);

/// theta_m restricts to a nonzero section on the component of `top`.
bool restricts_nonzero(const PeriodicSubdivision& s, const Cell& top, const LatticeVector& m);

}  // namespace thetabal
