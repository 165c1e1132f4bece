#include <doctest.h>

#include <sstream>

#include "thetabal/error.hpp"
#include "thetabal/io.hpp"

using namespace thetabal;
using namespace thetabal::io;
using Rows = std::vector<std::vector<std::int64_t>>;

TEST_CASE("parsing command-line values") {
  CHECK(parse_qform("2") == QForm(Rows{{2}}));
  CHECK(parse_qform("2,1,1,2") == QForm(Rows{{2, 1}, {1, 2}}));
  CHECK(parse_qform("2,1;1,2") == QForm(Rows{{2, 1}, {1, 2}}));
  CHECK_THROWS_AS(parse_qform("2,1,1"), ConfigError);
  CHECK_THROWS_AS(parse_qform("3"), ConfigError);
  CHECK_THROWS_AS(parse_qform("2,x"), ConfigError);
  CHECK(parse_complex("0.3") == Complex(0.3, 0.0));
  CHECK(parse_complex("0.3,-0.1") == Complex(0.3, -0.1));
  CHECK_THROWS_AS(parse_complex("0.3,0.1,2"), ConfigError);
  CHECK(parse_complex_vector("0.1,0.2,0.3,0.4") == ComplexVec{Complex(0.1, 0.2), Complex(0.3, 0.4)});
  CHECK(parse_int_list("2,4,8") == std::vector<std::int64_t>{2, 4, 8});
  CHECK_THROWS_AS(parse_int_list(""), ConfigError);
}

TEST_CASE("scalar round trips") {
  for (const Rational& q : {Rational(0), make_rational(-7, 3), make_rational(1, 1024), Rational(12)}) {
    CHECK(rational_from_json(to_json(q)) == q);
    CHECK(rational_from_json(json::parse(dump(to_json(q)))) == q);
  }
  CHECK(to_json(make_rational(2, 4)) == json("1/2"));
  for (const Complex& z : {Complex(0.1, -3e-300), Complex(1.0 / 3.0, 2.0 / 7.0)})
    CHECK(complex_from_json(json::parse(dump(to_json(z)))) == z);
  CHECK_THROWS_AS(rational_from_json(json("1/0")), ConfigError);
  CHECK_THROWS_AS(complex_from_json(json::array({1.0})), ConfigError);
}

TEST_CASE("artifact round trips") {
  const QForm q(Rows{{4, 1}, {1, 2}});
  CHECK(qform_from_json(json::parse(dump(to_json(q)))) == q);

  const auto s = build_subdivision(q, 2);
  const json doc = json::parse(dump(subdivision_to_json(s)));
  CHECK(doc.at("k") == 2);
  CHECK(cells_from_json(doc) == s.cells());
  CHECK(qform_from_json(doc.at("form")) == q);

  const AtomicMeasure mu = ma_measure(s);
  CHECK(measure_from_json(json::parse(dump(to_json(mu)))) == mu);

  const auto s3 = build_subdivision(QForm(Rows{{2}}), 3);
  const LocalExpansion e = monomial_expansion(s3, RatVec{Rational(0)}, {1}, 3);
  const LocalExpansion back = expansion_from_json(json::parse(dump(to_json(e))));
  CHECK(back.generators == e.generators);
  CHECK(back.terms == e.terms);

  Eigen::MatrixXcd a(2, 2);
  a << Complex(1, 2), Complex(0.5, -1e-17), Complex(1.0 / 3.0, 0), Complex(-2, 7);
  CHECK(matrix_from_json(json::parse(dump(to_json(a)))) == a);
}

TEST_CASE("convergence CSV") {
  std::vector<ConvergenceRow> rows{{2, make_rational(1, 16), 0.1 + 0.2, 1.0 / 3.0, Rational(4)},
                                   {4, make_rational(1, 64), -1e-300, 2.5, Rational(8)}};
  std::ostringstream os;
  write_convergence_csv(os, rows);
  CHECK(os.str().rfind("k,sup_gap,pairing_lhs,pairing_rhs,ma_total_mass\n", 0) == 0);
  std::istringstream is(os.str());
  const auto back = read_convergence_csv(is);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].k == rows[i].k);
    CHECK(back[i].sup_gap == rows[i].sup_gap);
    CHECK(back[i].pairing_lhs == rows[i].pairing_lhs);
    CHECK(back[i].pairing_rhs == rows[i].pairing_rhs);
    CHECK(back[i].ma_total_mass == rows[i].ma_total_mass);
  }
  std::istringstream bad("k,foo\n1,2\n");
  CHECK_THROWS_AS(read_convergence_csv(bad), ConfigError);
}

TEST_CASE("dump is deterministic") {
  const auto s = build_subdivision(QForm(Rows{{2, 1}, {1, 2}}), 3);
  CHECK(dump(subdivision_to_json(s)) == dump(subdivision_to_json(build_subdivision(QForm(Rows{{2, 1}, {1, 2}}), 3))));
  CHECK(dump(json::object()).back() == '\n');
}
