// thetabal: command-line front end.
//
// Exit codes: 0 success, 1 internal failure, 2 configuration error,
// 3 numeric certification failure (including failed tolerance checks).

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "thetabal/balanced.hpp"
#include "thetabal/error.hpp"
#include "thetabal/io.hpp"
#include "thetabal/monge_ampere.hpp"
#include "thetabal/subdivision.hpp"
#include "thetabal/theta.hpp"

namespace {

using namespace thetabal;
using io::json;

constexpr const char* kVersion = "thetabal 1.0.0";

struct Common {
  std::string z;
  std::int64_t k = 1;
  std::string output;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c, bool needs_k = true) {
  cmd->add_option("--Z", c.z, "quadratic form, row-major \"2,1,1,2\" or \"2,1;1,2\"")->required();
  if (needs_k) cmd->add_option("--k", c.k, "level k")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--output,--out,-o", c.output, "write to this file instead of stdout");
}

// Range limits for desk-scale runs.
void check_ranges(const QForm& q, std::int64_t k) {
  const int n = q.rank();
  if (n > 3) throw ConfigError("n must be at most 3");
  const std::int64_t kmax = n == 1 ? 64 : (n == 2 ? 6 : 4);
  if (k < 1 || k > kmax) throw ConfigError("k must lie in [1, " + std::to_string(kmax) + "] for n = " + std::to_string(n));
}

void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + c.output);
  f << text;
}

void fail(const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toric degenerations, theta functions and balanced embeddings of abelian varieties"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for randomized sample drivers (theta --random)");

  Common sub_c;
  auto* sub = app.add_subcommand("subdivide", "canonical decomposition of B_k and its quotient complex");
  add_common(sub, sub_c);

  Common ma_c;
  bool ma_gap = false;
  std::string ma_pairing;
  auto* ma = app.add_subcommand("ma", "Monge-Ampere measure of the periodic potential");
  add_common(ma, ma_c);
  ma->add_flag("--sup-gap", ma_gap, "also report the exact rescaled sup gap");
  ma->add_option("--pairing", ma_pairing, "f=name: also report the weak-convergence pairing");

  Common th_c;
  std::string th_t = "0.3", th_w, th_expand, th_m;
  bool th_grad = false;
  int th_order = 3, th_random = 0;
  double th_eps = 1e-12, th_im = 1.0;
  auto* th = app.add_subcommand("theta", "evaluate or expand the level-k theta functions");
  add_common(th, th_c);
  th->add_option("--t", th_t, "base parameter re,im with 0 < |t| < 1");
  th->add_option("--w", th_w, "evaluation point re,im,re,im,...");
  th->add_flag("--grad", th_grad, "also report gradients");
  th->add_option("--expand", th_expand, "vertex=v1,v2,...: series in the toric chart at the vertex");
  th->add_option("--m", th_m, "restrict --expand to one index m");
  th->add_option("--order", th_order, "expansion keeps v = c + k nu, |nu|_inf <= order, c the representative of m nearest the vertex")->check(CLI::NonNegativeNumber);
  th->add_option("--random", th_random, "evaluate at this many random points (uses --seed)")->check(CLI::NonNegativeNumber);
  th->add_option("--eps", th_eps, "truncation tolerance")->check(CLI::PositiveNumber);
  th->add_option("--im-bound", th_im, "largest |Im w| the truncation is certified for");

  Common bal_c;
  std::string bal_t = "0.3";
  int bal_grid = 0;
  double bal_eps = 1e-12, bal_defect_tol = 1e-5, bal_volume_tol = 1e-6;
  auto* bal = app.add_subcommand("balanced", "Gram matrix, volume and equivariance checks on the fiber");
  add_common(bal, bal_c);
  bal->add_option("--t", bal_t, "base parameter re,im with 0 < |t| < 1");
  bal->add_option("--grid", bal_grid, "quadrature nodes per axis (default 64 for n = 1, 24 otherwise)");
  bal->add_option("--report", bal_c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  bal->add_option("--eps", bal_eps, "relative truncation tolerance")->check(CLI::PositiveNumber);
  bal->add_option("--defect-tol", bal_defect_tol, "pass threshold for balanced_defect");
  bal->add_option("--volume-tol", bal_volume_tol, "pass threshold for the relative volume error");

  Common cv_c;
  std::string cv_k = "2,4,8,16", cv_f = "sin2";
  int cv_res = 0;
  auto* cv = app.add_subcommand("converge", "sup-norm and weak convergence sweep over k (CSV)");
  add_common(cv, cv_c, false);
  cv->add_option("--k", cv_k, "comma-separated levels");
  cv->add_option("--test-function", cv_f, "one, sin2, tent or bump");
  cv->add_option("--resolution", cv_res, "reference quadrature nodes per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("config", e.what());
    return 2;
  }

  try {
    if (sub->parsed()) {
      const QForm q = io::parse_qform(sub_c.z);
      check_ranges(q, sub_c.k);
      emit(sub_c, io::dump(io::subdivision_to_json(build_subdivision(q, sub_c.k))));
    } else if (ma->parsed()) {
      const QForm q = io::parse_qform(ma_c.z);
      check_ranges(q, ma_c.k);
      const PeriodicSubdivision s = build_subdivision(q, ma_c.k);
      json j = io::to_json(ma_measure(s));
      j["det_Z"] = io::to_json(q.determinant());
      if (ma_gap) j["sup_gap"] = io::to_json(rescaled_sup_gap(s));
      if (!ma_pairing.empty()) {
        if (ma_pairing.rfind("f=", 0) != 0) throw ConfigError("--pairing takes f=name");
        const Pairing p = weak_convergence_pairing(q, ma_c.k, named_test_function(ma_pairing.substr(2)));
        j["pairing"] = {{"f", ma_pairing.substr(2)}, {"lhs", p.lhs}, {"rhs", p.rhs}};
      }
      emit(ma_c, io::dump(j));
    } else if (th->parsed()) {
      const QForm q = io::parse_qform(th_c.z);
      check_ranges(q, th_c.k);
      const Complex t = io::parse_complex(th_t);
      json out{{"k", th_c.k}, {"t", io::to_json(t)}};
      if (!th_expand.empty()) {
        if (th_expand.rfind("vertex=", 0) != 0) throw ConfigError("--expand takes vertex=v1,...");
        RatVec vertex;
        for (const auto& s : io::parse_int_list(th_expand.substr(7))) vertex.push_back(static_cast<long>(s));
        const PeriodicSubdivision s = build_subdivision(q, th_c.k);
        json exps = json::array();
        for (std::size_t idx = 0; idx < residue_count(th_c.k, q.rank()); ++idx) {
          const LatticeVector m = residue_from_index(th_c.k, q.rank(), idx);
          if (!th_m.empty() && reduce_mod(th_c.k, io::parse_int_list(th_m)) != m) continue;
          json e = io::to_json(monomial_expansion(s, vertex, m, th_order));
          e["m"] = m;
          exps.push_back(e);
        }
        out["vertex"] = io::parse_int_list(th_expand.substr(7));
        out["expansions"] = exps;
      }
      std::vector<ComplexVec> points;
      if (!th_w.empty()) points.push_back(io::parse_complex_vector(th_w));
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> re(0.0, 1.0), im(-th_im, th_im);
      for (int r = 0; r < th_random; ++r) {
        ComplexVec w;
        for (int i = 0; i < q.rank(); ++i) w.emplace_back(re(rng), im(rng));
        points.push_back(w);
      }
      if (!points.empty()) {
        const ThetaContext ctx(q, th_c.k, t, {th_eps, th_im});
        out["radius"] = ctx.radius();
        json evals = json::array();
        for (const auto& w : points) {
          json pw = json::array();
          for (const auto& z : w) pw.push_back(io::to_json(z));
          const ThetaBatch b = theta_batch(ctx, w, th_grad);
          json vals = json::array();
          json grads = json::array();
          for (std::size_t m = 0; m < b.functions; ++m) {
            vals.push_back(io::to_json(b.value(m, 0)));
            if (!th_grad) continue;
            json g = json::array();
            for (int i = 0; i < b.dim; ++i) g.push_back(io::to_json(b.grad(m, i, 0)));
            grads.push_back(g);
          }
          json e{{"w", pw}, {"values", vals}};
          if (th_grad) e["grads"] = grads;
          evals.push_back(e);
        }
        out["evaluations"] = evals;
      }
      if (th_expand.empty() && points.empty()) throw ConfigError("theta needs --w, --random or --expand");
      emit(th_c, io::dump(out));
    } else if (bal->parsed()) {
      const QForm q = io::parse_qform(bal_c.z);
      check_ranges(q, bal_c.k);
      const Complex t = io::parse_complex(bal_t);
      const int grid = bal_grid > 0 ? bal_grid : (q.rank() == 1 ? 64 : 24);
      const AbelianFiber fiber(q, bal_c.k, t, {bal_eps, 1.0});
      QuadratureOptions opt;
      opt.grid = grid;
      const GramMatrix g = gram_matrix(fiber, opt);
      const double defect = balanced_defect(g.entries);
      const double expected = static_cast<double>(fiber.context().size());
      const double vol_err = std::abs(g.volume - expected) / expected;
      const auto gens = heisenberg_generators(bal_c.k, q.rank());
      const int commutant = commutant_dimension(gens);
      double comm = 0.0;
      for (const auto& gen : gens) comm = std::max(comm, commutator_norm(g.entries, gen));
      const bool ok_defect = defect < bal_defect_tol;
      const bool ok_volume = vol_err < bal_volume_tol;
      const bool ok_commutant = commutant == 1;
      if (bal_c.format == "json") {
        json rep{{"k", bal_c.k},
                 {"t", io::to_json(t)},
                 {"grid", grid},
                 {"form", io::to_json(q)},
                 {"gram", io::to_json(g.entries)},
                 {"gram_estimated_error", g.estimated_error},
                 {"balanced_defect", defect},
                 {"fubini_volume", g.volume},
                 {"volume_relative_error", vol_err},
                 {"commutant_dimension", commutant},
                 {"max_commutator_norm", comm},
                 {"checks",
                  {{"balanced_defect", {{"tolerance", bal_defect_tol}, {"pass", ok_defect}}},
                   {"fubini_volume", {{"tolerance", bal_volume_tol}, {"pass", ok_volume}}},
                   {"commutant_dimension", {{"expected", 1}, {"pass", ok_commutant}}}}}};
        emit(bal_c, io::dump(rep));
      } else {
        std::ostringstream os;
        os.precision(17);
        os << "quantity,value,tolerance,pass\n";
        os << "balanced_defect," << defect << ',' << bal_defect_tol << ',' << ok_defect << '\n';
        os << "volume_relative_error," << vol_err << ',' << bal_volume_tol << ',' << ok_volume << '\n';
        os << "fubini_volume," << g.volume << ",,\n";
        os << "commutant_dimension," << commutant << ",1," << ok_commutant << '\n';
        os << "max_commutator_norm," << comm << ",,\n";
        os << "gram_estimated_error," << g.estimated_error << ",,\n";
        emit(bal_c, os.str());
      }
      if (!(ok_defect && ok_volume && ok_commutant)) return 3;
    } else if (cv->parsed()) {
      const QForm q = io::parse_qform(cv_c.z);
      const TestFunction f = named_test_function(cv_f);
      std::vector<io::ConvergenceRow> rows;
      for (const auto k : io::parse_int_list(cv_k)) {
        check_ranges(q, k);
        const PeriodicSubdivision s = build_subdivision(q, k);
        const Pairing p = weak_convergence_pairing(q, k, f, cv_res);
        rows.push_back({k, rescaled_sup_gap(s), p.lhs, p.rhs, ma_measure(s).total()});
      }
      std::ostringstream os;
      io::write_convergence_csv(os, rows);
      emit(cv_c, os.str());
    }
  } catch (const ConfigError& e) {
    fail("config", e.what());
    return 2;
  } catch (const CertificationError& e) {
    fail("certification", e.what());
    return 3;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 1;
  }
  return 0;
}
