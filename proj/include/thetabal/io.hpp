#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "thetabal/balanced.hpp"
#include "thetabal/monge_ampere.hpp"
#include "thetabal/subdivision.hpp"
#include "thetabal/theta.hpp"

namespace thetabal::io {

using nlohmann::json;

/// Flat row-major "2,1,1,2" or rows separated by ';' as in "2,1;1,2".
QForm parse_qform(const std::string& text);
/// "0.3" or "0.3,0.1".
Complex parse_complex(const std::string& text);
/// "re,im,re,im,..." with one pair per coordinate.
ComplexVec parse_complex_vector(const std::string& text);
std::vector<std::int64_t> parse_int_list(const std::string& text);

json to_json(const Rational& q);
Rational rational_from_json(const json& j);
json to_json(const Complex& z);
Complex complex_from_json(const json& j);

json to_json(const QForm& q);
QForm qform_from_json(const json& j);

json to_json(const Cell& c);
Cell cell_from_json(const json& j);

/// {"n", "k", "form", "cells", "star", "components", "euler_characteristic"}.
json subdivision_to_json(const PeriodicSubdivision& s);
/// Cells listed in a subdivision document.
std::vector<Cell> cells_from_json(const json& j);

json to_json(const AtomicMeasure& mu);
AtomicMeasure measure_from_json(const json& j);

json to_json(const LocalExpansion& e);
LocalExpansion expansion_from_json(const json& j);

json to_json(const Eigen::MatrixXcd& a);
Eigen::MatrixXcd matrix_from_json(const json& j);

struct ConvergenceRow {
  std::int64_t k = 0;
  Rational sup_gap;
  double pairing_lhs = 0.0;
  double pairing_rhs = 0.0;
  Rational ma_total_mass;
};

/// Header plus one line per row; rationals as p/q, reals with 17 digits.
void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);
std::vector<ConvergenceRow> read_convergence_csv(std::istream& is);

/// Fixed formatting for artifacts: two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace thetabal::io
