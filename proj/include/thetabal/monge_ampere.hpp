#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "thetabal/subdivision.hpp"

namespace thetabal {

/// Dual polytope of a vertex m: conv of the slopes of the top cells at m,
/// i.e. the subdifferential of phi at m.
struct DualCell {
  LatticeVector base_point;
  std::vector<RatVec> vertices;
};

struct Atom {
  LatticeVector point;  // reduced representative in [0, k)^n
  Rational mass;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Discrete measure on B_k(Z), atoms in lexicographic residue order.
struct AtomicMeasure {
  std::vector<Atom> atoms;
  Rational total() const;
  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;
};

/// Extreme points of the subdifferential of phi at y0 (sorted). A single
/// slope inside a top cell; the full dual cell at a lattice point.
std::vector<RatVec> subdifferential(const PeriodicSubdivision& s, const RatVec& y0);

DualCell dual_cell(const PeriodicSubdivision& s, const LatticeVector& m);

/// MA(phi) = sum_m Vol(dual cell of m) delta_m, volumes computed exactly and
/// independently for every residue.
AtomicMeasure ma_measure(const PeriodicSubdivision& s);

/// Same measure for phi + a, where a is any affine function: every slope is
/// shifted by a.slope, so each dual cell is translated.
AtomicMeasure ma_measure(const PeriodicSubdivision& s, const AffineLinear& added);

/// sup_B |k^-2 chi_k^* phi - phi_bar| = k^-2 sup |phi - phi_bar|, exact.
Rational rescaled_sup_gap(const QForm& q, std::int64_t k);
Rational rescaled_sup_gap(const PeriodicSubdivision& s);

/// sup over M_R of phi - phi_bar (k-independent), exact.
Rational max_hull_gap(const PeriodicSubdivision& s);

using TestFunction = std::function<double(std::span<const double>)>;

struct Pairing {
  double lhs = 0;  // k^-n det(Z) sum_{m' in (1/k)M / M} f(m')
  double rhs = 0;  // det(Z) int_B f dy, midpoint reference
};

/// Default per-axis resolution of the midpoint reference: 10^6 samples in
/// n = 1, 1000^2 in n = 2, 100^3 in n = 3.
int default_reference_resolution(int n);

Pairing weak_convergence_pairing(const QForm& q, std::int64_t k, const TestFunction& f,
                                 int reference_resolution = 0);

/// Named test functions on [0,1)^n: "one", "sin2", "bump", "tent".
TestFunction named_test_function(const std::string& name);

}  // namespace thetabal
