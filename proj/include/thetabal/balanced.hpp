#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thetabal/theta.hpp"

namespace thetabal {

/// The fiber X_s = C^n / (Z^n + tau_s Z Z^n), s = t^k, with the level-k thetas.
///
/// Parametrized by (x, y) in [0,1)^{2n} through w = x + tau_s Z y, so that
/// Im w = Im(tau_s) Z y and the Jacobian is |Im tau_s|^n det Z.
class AbelianFiber {
 public:
  explicit AbelianFiber(ThetaContext ctx);
  AbelianFiber(const QForm& q, std::int64_t k, Complex t, ThetaOptions options = {});

  const ThetaContext& context() const { return ctx_; }
  int rank() const { return ctx_.rank(); }

  ComplexVec point(std::span<const double> x, std::span<const double> y) const;
  /// Inverse of point() modulo the period lattice, reduced to [0,1)^{2n}.
  void coordinates(std::span<const Complex> w, std::span<double> x, std::span<double> y) const;
  double jacobian() const;

 private:
  ThetaContext ctx_;
};

/// Hermitian metric h with h |theta_m|^2 invariant under the period lattice:
/// log h(w) = 4 pi^2 / log|t| * (Im w)^T Z^{-1} (Im w).
double log_hermitian_weight(const ThetaContext& ctx, std::span<const double> im_w);

/// Pullback of the Fubini-Study form by w -> [theta_m(w)], as the Hermitian
/// matrix H with omega^n / n! = det(H) dRe(w) dIm(w); H = (1/pi) d dbar log S,
/// S = sum |theta_m|^2. Throws CertificationError if H has a clearly negative
/// eigenvalue.
Eigen::MatrixXcd fs_kahler_matrix(const AbelianFiber& fiber, std::span<const Complex> w);

struct GramMatrix {
  Eigen::MatrixXcd entries;
  int grid = 0;
  /// Largest entry change against the half-resolution sub-grid.
  double estimated_error = 0.0;
  /// Same quadrature of det(H) alone.
  double volume = 0.0;
};

/// Options shared by the quadratures: grid points per axis and a fixed shift of
/// the grid origin in (x, y) coordinates (units of the grid spacing).
struct QuadratureOptions {
  int grid = 64;
  std::vector<double> offset;  // 2n entries; empty means no shift
  kernels::Isa isa = kernels::active_isa();
};

/// Trapezoid rule on the torus for det(H) * Jacobian; tends to k^n.
double fubini_volume(const AbelianFiber& fiber, const QuadratureOptions& options);
double fubini_volume(const AbelianFiber& fiber, int grid);

/// G_{mm'} = integral of theta_m conj(theta_m') / S against the pulled-back
/// volume form. Balanced embeddings have G = (volume / k^n) I.
GramMatrix gram_matrix(const AbelianFiber& fiber, const QuadratureOptions& options);
GramMatrix gram_matrix(const AbelianFiber& fiber, int grid);

/// ||G - (tr G / d) I||_F / (tr G / d).
double balanced_defect(const Eigen::MatrixXcd& g);

/// Largest relative deviation between h(w) |rho(g) f|^2(w) and (h |f|^2)(w + a tau + b / k)
/// for f = sum coeff_m theta_m, over the sample points.
double hermitian_norm_invariance(const AbelianFiber& fiber, const HeisenbergElement& g,
                                 std::span<const Complex> coeff, std::span<const Complex> samples);

/// Dimension of {A : A g = g A for every generator}. Throws ConfigError on a
/// singular or mis-sized generator.
int commutant_dimension(std::span<const Eigen::MatrixXcd> generators);

/// ||A g - g A||_F.
double commutator_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& g);

}  // namespace thetabal
