#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thetabal/rational.hpp"

namespace thetabal {

/// Element of M = Z^n (or of the dual lattice N, depending on context).
using LatticeVector = std::vector<std::int64_t>;

/// Symmetric positive-definite integer matrix with even diagonal. Immutable.
///
/// Even diagonal makes 1/2 Z(m, m) an integer on the lattice, which the theta
/// engine relies on for monodromy invariance.
class QForm {
 public:
  /// Validates symmetry, even diagonal and positive definiteness (exact
  /// leading principal minors). Throws ConfigError.
  explicit QForm(std::vector<std::vector<std::int64_t>> rows);

  /// Row-major flat list; length must be a perfect square.
  static QForm from_flat(std::span<const std::int64_t> entries);

  int rank() const { return static_cast<int>(rows_.size()); }
  std::int64_t operator()(int i, int j) const { return rows_[i][j]; }
  const std::vector<std::vector<std::int64_t>>& rows() const { return rows_; }

  std::int64_t bilinear(const LatticeVector& a, const LatticeVector& b) const;
  Rational bilinear(const RatVec& a, const RatVec& b) const;
  LatticeVector apply(const LatticeVector& v) const;
  RatVec apply(const RatVec& v) const;

  const Rational& determinant() const { return det_; }
  /// Exact Z^{-1}.
  const RatMat& inverse() const { return inverse_; }
  RatMat as_rational() const;

  /// Rational lower bound on the smallest eigenvalue, certified by exact
  /// positive-definiteness of Z - lambda I. Within 2^-20 of the truth.
  const Rational& min_eigenvalue_bound() const { return lambda_min_; }

  friend bool operator==(const QForm& a, const QForm& b) { return a.rows_ == b.rows_; }

 private:
  std::vector<std::vector<std::int64_t>> rows_;
  Rational det_;
  RatMat inverse_;
  Rational lambda_min_;
};

/// Affine function y -> <slope, y> + constant with exact rational data.
struct AffineLinear {
  RatVec slope;
  Rational constant;

  Rational operator()(const RatVec& y) const;
  friend bool operator==(const AffineLinear&, const AffineLinear&) = default;
};

RatVec to_rational(const LatticeVector& v);

/// 1/2 y^T Z y.
Rational phi_bar(const QForm& q, const RatVec& y);
/// Integer-valued on the lattice for even-diagonal forms.
std::int64_t phi_bar(const QForm& q, const LatticeVector& m);

/// alpha_gamma(y) = Z(gamma, y) + 1/2 Z(gamma, gamma).
AffineLinear alpha(const QForm& q, const LatticeVector& gamma);

/// phi_bar(y + gamma) - phi_bar(y) - alpha_gamma(y); identically zero.
Rational cocycle_defect(const QForm& q, const RatVec& y, const LatticeVector& gamma);

/// Canonical representative of m in M / kM, coordinates in {0, ..., k-1}.
LatticeVector reduce_mod(std::int64_t k, const LatticeVector& m);

/// Position of a residue class in the lexicographic enumeration of B_k(Z).
std::size_t residue_index(std::int64_t k, const LatticeVector& m);
LatticeVector residue_from_index(std::int64_t k, int n, std::size_t index);
std::size_t residue_count(std::int64_t k, int n);

}  // namespace thetabal
