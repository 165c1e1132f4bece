#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace thetabal {

using Rational = mpq_class;
using RatVec = std::vector<Rational>;
using RatMat = std::vector<RatVec>;

/// Always "p/q" with q >= 1, so integers serialize as "3/1".
std::string to_string(const Rational& q);

/// Accepts "p/q" or a bare integer "p".
Rational parse_rational(const std::string& s);

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  Rational q(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  q.canonicalize();
  return q;
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

double to_double(const Rational& q);

Rational dot(const RatVec& a, const RatVec& b);

/// Exact determinant by fraction-free elimination.
Rational determinant(RatMat a);

/// Solves a x = b exactly. Returns false when a is singular.
bool solve(RatMat a, RatVec b, RatVec& x);

/// Rank of a rational matrix (rows need not be square).
int rank(RatMat a);

}  // namespace thetabal
