#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thetabal/lattice.hpp"

namespace thetabal {

/// A cell of the canonical decomposition: the projection of a lower face of
/// conv{(m, phi_bar(m))}. Top-dimensional cells carry the affine function that
/// phi restricts to.
struct Cell {
  std::vector<LatticeVector> vertices;  // sorted lexicographically
  int dim = 0;
  std::optional<AffineLinear> affine;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Translate of a cell by a lattice vector, keeping phi's cocycle: the affine
/// piece of sigma + g is y -> phi_sigma(y - g) + alpha_g(y - g).
Cell translate(const QForm& q, const Cell& c, const LatticeVector& g);

/// Canonical M_k-periodic PL convex function phi and its decomposition.
/// Immutable after construction.
class PeriodicSubdivision {
 public:
  PeriodicSubdivision(QForm q, std::int64_t k, std::vector<Cell> star, int window);

  const QForm& form() const { return q_; }
  std::int64_t level() const { return k_; }
  int rank() const { return q_.rank(); }

  /// Top cells having the origin as a vertex; every top cell is a lattice
  /// translate of one of these.
  const std::vector<Cell>& star() const { return star_; }
  /// One representative per top cell of the quotient B_k: lexicographically
  /// smallest vertex in [0, k)^n.
  const std::vector<Cell>& cells() const { return cells_; }
  /// Lattice window half-width used to certify the hull faces.
  int window() const { return window_; }

  /// Top cells containing the lattice point m (the star of 0 translated to m).
  std::vector<Cell> star_at(const LatticeVector& m) const;

  /// Affine pieces of phi active at y (those attaining phi(y)), with the
  /// value phi(y). Exact.
  std::vector<AffineLinear> active_pieces(const RatVec& y, Rational* value = nullptr) const;

 private:
  QForm q_;
  std::int64_t k_;
  std::vector<Cell> star_;
  std::vector<Cell> cells_;
  int window_;
  // Distinct affine pieces of the top cells meeting [0,1]^n.
  std::vector<AffineLinear> unit_pieces_;
};

/// Builds the canonical subdivision by an exact, certified lower hull over a
/// growing lattice window. Throws WindowExhaustedError if certification fails.
PeriodicSubdivision build_subdivision(const QForm& q, std::int64_t k);

/// Exact phi(y).
Rational eval_phi(const PeriodicSubdivision& s, const RatVec& y);

/// True iff every top-cell slope is integral.
bool slope_integrality(std::span<const Cell> cells);
bool slope_integrality(const PeriodicSubdivision& s);

/// Cell structure of the quotient torus B_k = M_R / kM.
struct QuotientComplex {
  /// cells_by_dim[d] lists one representative per quotient d-cell.
  std::vector<std::vector<Cell>> cells_by_dim;
  /// Toric component label of each top cell, parallel to cells_by_dim[n].
  std::vector<std::string> components;
  std::int64_t euler_characteristic = 0;

  std::size_t vertex_count() const { return cells_by_dim.empty() ? 0 : cells_by_dim[0].size(); }
};

QuotientComplex quotient_complex(const PeriodicSubdivision& s);

/// Canonical representative of a cell modulo kM (smallest vertex reduced).
std::vector<LatticeVector> canonical_vertices(std::int64_t k, std::vector<LatticeVector> vertices);

}  // namespace thetabal
