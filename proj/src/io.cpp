#include "thetabal/io.hpp"

#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "thetabal/error.hpp"

namespace thetabal::io {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad field '") + key + "': " + e.what());
  }
}

json lattice_list(const std::vector<LatticeVector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(v);
  return a;
}

}  // namespace

QForm parse_qform(const std::string& text) {
  if (text.find(';') == std::string::npos) {
    // Flat row-major list: "2,1,1,2" is [[2,1],[1,2]].
    return QForm::from_flat(parse_int_list(text));
  }
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& row : split(text, ';')) rows.push_back(parse_int_list(row));
  return QForm(rows);
}

Complex parse_complex(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() == 1) return {parse_double(parts[0]), 0.0};
  if (parts.size() == 2) return {parse_double(parts[0]), parse_double(parts[1])};
  throw ConfigError("complex number must be 're' or 're,im': '" + text + "'");
}

ComplexVec parse_complex_vector(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.empty() || parts.size() % 2 != 0) throw ConfigError("point must list re,im pairs: '" + text + "'");
  ComplexVec out;
  for (std::size_t i = 0; i < parts.size(); i += 2) out.emplace_back(parse_double(parts[i]), parse_double(parts[i + 1]));
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_int(p));
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

json to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const json& j) {
  if (!j.is_string()) throw ConfigError("rational must be a \"p/q\" string");
  return parse_rational(j.get<std::string>());
}

json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const QForm& q) { return {{"n", q.rank()}, {"entries", q.rows()}}; }

QForm qform_from_json(const json& j) {
  const auto n = get<int>(j, "n");
  const auto rows = get<std::vector<std::vector<std::int64_t>>>(j, "entries");
  if (n < 1 || rows.size() != static_cast<std::size_t>(n)) throw ConfigError("form entries must be n rows");
  return QForm(rows);
}

json to_json(const Cell& c) {
  json j{{"dim", c.dim}, {"vertices", lattice_list(c.vertices)}};
  if (c.affine) {
    json slope = json::array();
    for (const auto& s : c.affine->slope) slope.push_back(to_json(s));
    j["slope"] = slope;
    j["constant"] = to_json(c.affine->constant);
  }
  return j;
}

Cell cell_from_json(const json& j) {
  Cell c;
  c.vertices = get<std::vector<LatticeVector>>(j, "vertices");
  c.dim = get<int>(j, "dim");
  if (j.contains("slope")) {
    AffineLinear a;
    for (const auto& s : j.at("slope")) a.slope.push_back(rational_from_json(s));
    a.constant = rational_from_json(j.at("constant"));
    c.affine = a;
  }
  return c;
}

json subdivision_to_json(const PeriodicSubdivision& s) {
  const QuotientComplex qc = quotient_complex(s);
  json cells = json::array();
  for (const auto& c : s.cells()) cells.push_back(to_json(c));
  json star = json::array();
  for (const auto& c : s.star()) star.push_back(to_json(c));
  json counts = json::array();
  for (const auto& level : qc.cells_by_dim) counts.push_back(level.size());
  return {{"n", s.rank()},
          {"k", s.level()},
          {"form", to_json(s.form())},
          {"cells", cells},
          {"star", star},
          {"components", qc.components},
          {"cell_counts", counts},
          {"euler_characteristic", qc.euler_characteristic}};
}

std::vector<Cell> cells_from_json(const json& j) {
  if (!j.is_object() || !j.contains("cells") || !j.at("cells").is_array()) throw ConfigError("missing 'cells' array");
  std::vector<Cell> out;
  for (const auto& c : j.at("cells")) out.push_back(cell_from_json(c));
  return out;
}

json to_json(const AtomicMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms) atoms.push_back({{"m", a.point}, {"mass", to_json(a.mass)}});
  return {{"atoms", atoms}, {"total", to_json(mu.total())}};
}

AtomicMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("atoms")) throw ConfigError("missing 'atoms' array");
  AtomicMeasure mu;
  for (const auto& a : j.at("atoms")) mu.atoms.push_back({get<LatticeVector>(a, "m"), rational_from_json(a.at("mass"))});
  if (j.contains("total") && rational_from_json(j.at("total")) != mu.total())
    throw ConfigError("measure total does not match its atoms");
  return mu;
}

json to_json(const LocalExpansion& e) {
  json terms = json::array();
  for (const auto& t : e.terms) {
    terms.push_back({{"point", t.monomial.m}, {"r", t.monomial.r}, {"z_exps", t.z_exps}, {"t_exp", t.t_exp}});
  }
  return {{"generators", lattice_list(e.generators)}, {"terms", terms}};
}

LocalExpansion expansion_from_json(const json& j) {
  LocalExpansion e;
  e.generators = get<std::vector<LatticeVector>>(j, "generators");
  if (!j.contains("terms")) throw ConfigError("missing 'terms'");
  for (const auto& t : j.at("terms")) {
    ExpansionTerm term;
    term.monomial = {get<LatticeVector>(t, "point"), get<std::int64_t>(t, "r"), 1};
    term.z_exps = get<std::vector<std::int64_t>>(t, "z_exps");
    term.t_exp = get<std::int64_t>(t, "t_exp");
    e.terms.push_back(std::move(term));
  }
  return e;
}

json to_json(const Eigen::MatrixXcd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(to_json(Complex(a(i, j))));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != c) throw ConfigError("ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) a(i, k) = complex_from_json(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
  }
  return a;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "k,sup_gap,pairing_lhs,pairing_rhs,ma_total_mass\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    os << r.k << ',' << to_string(r.sup_gap) << ',' << r.pairing_lhs << ',' << r.pairing_rhs << ','
       << to_string(r.ma_total_mass) << '\n';
  }
  os.precision(old);
}

std::vector<ConvergenceRow> read_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "k,sup_gap,pairing_lhs,pairing_rhs,ma_total_mass")
    throw ConfigError("unexpected convergence CSV header");
  std::vector<ConvergenceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ConfigError("convergence CSV row needs 5 fields");
    rows.push_back({parse_int(f[0]), parse_rational(f[1]), parse_double(f[2]), parse_double(f[3]), parse_rational(f[4])});
  }
  return rows;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace thetabal::io
