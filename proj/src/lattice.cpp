#include "thetabal/lattice.hpp"

#include <cmath>
#include <string>

#include "thetabal/error.hpp"

namespace thetabal {
namespace {

bool positive_definite(const RatMat& a) {
  const std::size_t n = a.size();
  for (std::size_t k = 1; k <= n; ++k) {
    RatMat minor(k, RatVec(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) minor[i][j] = a[i][j];
    if (sgn(thetabal::determinant(std::move(minor))) <= 0) return false;
  }
  return true;
}

Rational lambda_lower_bound(const RatMat& z) {
  // Bisection on lambda = p / 2^20: Z - lambda I positive definite certifies
  // lambda < lambda_min.
  const std::size_t n = z.size();
  auto shifted_pd = [&](const Rational& lambda) {
    RatMat a = z;
    for (std::size_t i = 0; i < n; ++i) a[i][i] -= lambda;
    return positive_definite(a);
  };
  Rational lo = 0;
  Rational hi = z[0][0];  // lambda_min <= Z_00
  const Rational resolution(1, 1 << 20);
  while (hi - lo > resolution) {
    Rational mid = (lo + hi) / 2;
    if (shifted_pd(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace

QForm::QForm(std::vector<std::vector<std::int64_t>> rows) : rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw ConfigError("quadratic form must have rank >= 1");
  for (const auto& r : rows_)
    if (r.size() != n) throw ConfigError("quadratic form must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (rows_[i][i] % 2 != 0)
      throw ConfigError("quadratic form must have even diagonal (Z_" + std::to_string(i) +
                        std::to_string(i) + " = " + std::to_string(rows_[i][i]) + ")");
    for (std::size_t j = 0; j < i; ++j)
      if (rows_[i][j] != rows_[j][i]) throw ConfigError("quadratic form must be symmetric");
  }
  const RatMat z = as_rational();
  if (!positive_definite(z)) throw ConfigError("quadratic form must be positive definite");
  det_ = thetabal::determinant(z);

  inverse_.assign(n, RatVec(n));
  for (std::size_t j = 0; j < n; ++j) {
    RatVec e(n, Rational(0));
    e[j] = 1;
    RatVec col;
    solve(z, e, col);
    for (std::size_t i = 0; i < n; ++i) inverse_[i][j] = col[i];
  }
  lambda_min_ = lambda_lower_bound(z);
}

QForm QForm::from_flat(std::span<const std::int64_t> entries) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(entries.size()))));
  if (n == 0 || n * n != entries.size())
    throw ConfigError("flat quadratic form needs n*n entries, got " + std::to_string(entries.size()));
  std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = entries[i * n + j];
  return QForm(std::move(rows));
}

RatMat QForm::as_rational() const {
  const std::size_t n = rows_.size();
  RatMat z(n, RatVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) z[i][j] = Rational(static_cast<long>(rows_[i][j]));
  return z;
}

std::int64_t QForm::bilinear(const LatticeVector& a, const LatticeVector& b) const {
  if (a.size() != rows_.size() || b.size() != rows_.size())
    throw ConfigError("dimension mismatch in bilinear form");
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * rows_[i][j] * b[j];
  return s;
}

Rational QForm::bilinear(const RatVec& a, const RatVec& b) const {
  if (a.size() != rows_.size() || b.size() != rows_.size())
    throw ConfigError("dimension mismatch in bilinear form");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (rows_[i][j] != 0) s += a[i] * Rational(static_cast<long>(rows_[i][j])) * b[j];
  return s;
}

LatticeVector QForm::apply(const LatticeVector& v) const {
  if (v.size() != rows_.size()) throw ConfigError("dimension mismatch");
  LatticeVector out(v.size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += rows_[i][j] * v[j];
  return out;
}

RatVec QForm::apply(const RatVec& v) const {
  if (v.size() != rows_.size()) throw ConfigError("dimension mismatch");
  RatVec out(v.size(), Rational(0));
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (rows_[i][j] != 0) out[i] += Rational(static_cast<long>(rows_[i][j])) * v[j];
  return out;
}

Rational AffineLinear::operator()(const RatVec& y) const { return dot(slope, y) + constant; }

RatVec to_rational(const LatticeVector& v) {
  RatVec out;
  out.reserve(v.size());
  for (auto c : v) out.emplace_back(static_cast<long>(c));
  return out;
}

Rational phi_bar(const QForm& q, const RatVec& y) { return q.bilinear(y, y) / 2; }

std::int64_t phi_bar(const QForm& q, const LatticeVector& m) { return q.bilinear(m, m) / 2; }

AffineLinear alpha(const QForm& q, const LatticeVector& gamma) {
  return AffineLinear{to_rational(q.apply(gamma)), make_rational(q.bilinear(gamma, gamma), 2)};
}

Rational cocycle_defect(const QForm& q, const RatVec& y, const LatticeVector& gamma) {
  if (y.size() != gamma.size()) throw ConfigError("dimension mismatch");
  RatVec shifted = y;
  for (std::size_t i = 0; i < y.size(); ++i) shifted[i] += static_cast<long>(gamma[i]);
  return phi_bar(q, shifted) - phi_bar(q, y) - alpha(q, gamma)(y);
}

LatticeVector reduce_mod(std::int64_t k, const LatticeVector& m) {
  if (k <= 0) throw ConfigError("modulus k must be >= 1");
  LatticeVector out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = ((m[i] % k) + k) % k;
  return out;
}

std::size_t residue_index(std::int64_t k, const LatticeVector& m) {
  const LatticeVector r = reduce_mod(k, m);
  std::size_t idx = 0;
  for (auto c : r) idx = idx * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
  return idx;
}

LatticeVector residue_from_index(std::int64_t k, int n, std::size_t index) {
  LatticeVector m(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    m[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(index % static_cast<std::size_t>(k));
    index /= static_cast<std::size_t>(k);
  }
  return m;
}

std::size_t residue_count(std::int64_t k, int n) {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::size_t>(k);
  return c;
}

}  // namespace thetabal
