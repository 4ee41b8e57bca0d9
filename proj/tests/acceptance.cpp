// Acceptance gate: each invocation runs one numbered criterion end to end and
// prints a single "criterion N: PASS/FAIL (details)" line. The process exits
// nonzero on FAIL so every criterion is its own ctest entry.
//
// Usage: acceptance <number> --cli <sform binary> --fixtures <dir>

#include "sform/charpit.hpp"
#include "sform/formats.hpp"
#include "sform/forms.hpp"
#include "sform/grid.hpp"
#include "sform/parse.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sform;

namespace {

struct Args {
  int criterion = 0;
  std::string cli;
  std::string fixtures;
};

std::string g_fixtures;
std::string g_cli;

std::string fixture(const std::string& name) { return g_fixtures + "/" + name; }

// ------------------------------------------------------- random generators --

Expression random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& names,
                             int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
  switch (pick(rng)) {
    case 0: {
      std::uniform_int_distribution<std::int64_t> c(-4, 4);
      return Expression::integer(c(rng));
    }
    case 1: {
      std::uniform_int_distribution<std::size_t> v(0, names.size() - 1);
      return Expression::variable(names[v(rng)]);
    }
    case 2: {
      std::vector<Expression> terms;
      std::uniform_int_distribution<int> count(2, 3);
      const int k = count(rng);
      for (int i = 0; i < k; ++i) terms.push_back(random_polynomial(rng, names, depth - 1));
      return Expression::sum(std::move(terms));
    }
    case 3: {
      std::vector<Expression> factors;
      for (int i = 0; i < 2; ++i) factors.push_back(random_polynomial(rng, names, depth - 1));
      return Expression::product(std::move(factors));
    }
    default: {
      std::uniform_int_distribution<std::int64_t> ex(2, 3);
      return Expression::pow(random_polynomial(rng, names, depth - 1), ex(rng));
    }
  }
}

Expression random_coefficient(std::mt19937_64& rng, const std::vector<std::string>& names,
                              int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 6);
  const int choice = pick(rng);
  if (choice <= 4) return random_polynomial(rng, names, depth);
  const FuncKind kind = choice == 5 ? FuncKind::Sin : FuncKind::Exp;
  return Expression::call(kind, random_polynomial(rng, names, depth - 1));
}

std::vector<MultiIndex> increasing_indices(int n, int degree) {
  std::vector<MultiIndex> out;
  std::vector<int> picks(degree);
  auto rec = [&](auto&& self, int next, int slot) -> void {
    if (slot == degree) {
      out.push_back(picks);
      return;
    }
    for (int k = next; k < n; ++k) {
      picks[slot] = k;
      self(self, k + 1, slot + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

DifferentialForm random_form(std::mt19937_64& rng, const CoordinateChart& chart, int degree) {
  const int n = static_cast<int>(chart.dimension());
  DifferentialForm w(chart, degree);
  std::vector<MultiIndex> all = increasing_indices(n, degree);
  std::uniform_int_distribution<int> keep(0, 1);
  bool any = false;
  for (const MultiIndex& index : all) {
    if (!any || keep(rng) == 1) {
      w.add_term(index, random_coefficient(rng, chart.names, 2));
      any = true;
    }
  }
  return w;
}

CoordinateChart euclid(int n) {
  static const char* names[4] = {"x", "y", "z", "w"};
  return CoordinateChart::make(std::vector<std::string>(names, names + n));
}

// --------------------------------------------------------------- criteria --

// d(dw) vanishes as an expression for randomized forms, and the commutator of
// an exact 1-form d(u) is identically zero. Both checks are symbolic.
bool criterion_1(std::string& detail) {
  std::mt19937_64 rng(0x5EED0101);
  std::uniform_int_distribution<int> dim_pick(2, 4);
  std::uniform_int_distribution<int> deg_pick(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const CoordinateChart chart = euclid(dim_pick(rng));
    const DifferentialForm w = random_form(rng, chart, deg_pick(rng));
    const DifferentialForm dd = exterior_derivative(exterior_derivative(w));
    if (!dd.is_zero()) {
      detail = "trial " + std::to_string(trial) + ": d(dw) has " +
               std::to_string(dd.terms().size()) + " surviving terms";
      return false;
    }
  }
  for (int trial = 0; trial < 40; ++trial) {
    const CoordinateChart chart = euclid(dim_pick(rng));
    DifferentialForm scalar(chart, 0);
    scalar.add_term({}, random_polynomial(rng, chart.names, 3));
    const DifferentialForm theta = exterior_derivative(scalar);
    const CommutatorMatrix k = commutator_components(theta);
    for (std::size_t i = 0; i < chart.dimension(); ++i) {
      for (std::size_t j = 0; j < chart.dimension(); ++j) {
        if (!k.entries[i][j].is_zero()) {
          detail = "exact trial " + std::to_string(trial) + ": K[" + std::to_string(i + 1) +
                   "][" + std::to_string(j + 1) + "] = " + to_string(k.entries[i][j]);
          return false;
        }
      }
    }
  }
  detail = "200 random forms with d(dw) = 0 and 40 exact 1-forms with zero commutator, "
           "all symbolic";
  return true;
}

// Unit-speed fronts from the circle: rays are straight to 1e-9, the equation
// value is conserved to 1e-9, and inward rays focus at s = 0.5 +- 0.02.
bool criterion_2(std::string& detail) {
  const ProblemFile out = read_problem_file(fixture("eikonal_out.prob"));
  const InitialStrip strip = complete_initial_strip(out.problem, out.strip);
  const auto trajectories = integrate_characteristics(out.problem, strip, 5.0, 1e-2);

  double max_deviation = 0.0;
  double max_residual = 0.0;
  for (const CharacteristicTrajectory& t : trajectories) {
    const auto& first = t.samples.front();
    const double dx = first.p[0];
    const double dy = first.p[1];  // unit direction of the ray
    for (const TrajectorySample& s : t.samples) {
      const double vx = s.x[0] - first.x[0];
      const double vy = s.x[1] - first.x[1];
      const double along = vx * dx + vy * dy;
      const double off_x = vx - along * dx;
      const double off_y = vy - along * dy;
      max_deviation = std::max(max_deviation, std::hypot(off_x, off_y));
    }
    max_residual = std::max(max_residual, conservation_check(t));
  }
  if (max_deviation > 1e-9 || max_residual > 1e-9) {
    detail = "ray line deviation " + format_double(max_deviation) + ", |F| residual " +
             format_double(max_residual);
    return false;
  }

  const ProblemFile in = read_problem_file(fixture("eikonal_in.prob"));
  const InitialStrip in_strip = complete_initial_strip(in.problem, in.strip);
  const auto inward = integrate_characteristics(in.problem, in_strip, 1.0, 1e-2);
  const DegeneracyReport report = detect_degeneracy(inward);
  if (!report.crossing_s || std::abs(*report.crossing_s - 0.5) > 0.02) {
    detail = "focus " + (report.crossing_s ? format_double(*report.crossing_s)
                                           : std::string("not detected")) +
             ", expected 0.5 +- 0.02";
    return false;
  }
  detail = "deviation " + format_double(max_deviation) + ", |F| residual " +
           format_double(max_residual) + ", focus s* = " + format_double(*report.crossing_s);
  return true;
}

// Slope steepening with u(x, 0) = -x: the momentum follows -1/(1-s), the
// strip Jacobian degenerates at s = 1, and a query past the focus sees a
// multivalued reconstruction.
bool criterion_3(std::string& detail) {
  const ProblemFile pf = read_problem_file(fixture("burgers.prob"));
  const InitialStrip strip = complete_initial_strip(pf.problem, pf.strip);

  const auto short_run = integrate_characteristics(pf.problem, strip, 0.9, 1e-3);
  double max_err = 0.0;
  for (const CharacteristicTrajectory& t : short_run) {
    for (const TrajectorySample& s : t.samples) {
      max_err = std::max(max_err, std::abs(s.p[0] + 1.0 / (1.0 - s.s)));
    }
  }
  if (max_err > 1e-6) {
    detail = "momentum error vs -1/(1-s) is " + format_double(max_err);
    return false;
  }

  const auto long_run = integrate_characteristics(pf.problem, strip, 1.2, 1e-3);
  const DegeneracyReport report = detect_degeneracy(long_run);
  if (!report.crossing_s || std::abs(*report.crossing_s - 1.0) > 0.05) {
    detail = "degeneracy " + (report.crossing_s ? format_double(*report.crossing_s)
                                                : std::string("not detected")) +
             ", expected 1.0 +- 0.05";
    return false;
  }

  const std::string prefix = "momentum error " + format_double(max_err) + ", s* = " +
                             format_double(*report.crossing_s);
  const std::vector<std::vector<double>> queries = {{0.0, 1.5}, {0.2, 1.5}, {-0.2, 1.5}};
  try {
    const auto reconstructions = reconstruct_solution(long_run, queries);
    for (const Reconstruction& rec : reconstructions) {
      if (rec.values.size() < 2) {
        detail = prefix + ", but multiplicity at t = 1.5 is " +
                 std::to_string(rec.values.size());
        return false;
      }
    }
  } catch (const OutsideCoverageError&) {
    // This initial profile focuses every characteristic on one point, where
    // the momentum diverges and integration stops; no trajectory reaches
    // t = 1.5, and the exact continuation would re-fan single-valued anyway.
    detail = prefix + ", but t = 1.5 lies outside trajectory coverage "
             "(momentum pole at s = 1 ends every trajectory)";
    return false;
  }
  detail = prefix + ", multiplicity >= 2 at t = 1.5";
  return true;
}

// Constant-speed advection: reconstructed u equals sin(x - 2t) at 20 random
// query points to 1e-6.
bool criterion_4(std::string& detail) {
  ProblemFile pf = read_problem_file(fixture("transport.prob"));
  pf.strip.sample_count = 4801;  // 1.25e-3 strip spacing bounds interpolation error
  const InitialStrip strip = complete_initial_strip(pf.problem, pf.strip);
  const auto trajectories = integrate_characteristics(pf.problem, strip, 0.5, 1e-2);

  std::mt19937_64 rng(0x5EED0104);
  std::uniform_real_distribution<double> x_pick(-0.5, 0.5);
  std::uniform_real_distribution<double> t_pick(0.05, 0.45);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 20; ++i) points.push_back({x_pick(rng), t_pick(rng)});

  const auto reconstructions = reconstruct_solution(trajectories, points);
  double max_err = 0.0;
  for (const Reconstruction& rec : reconstructions) {
    for (const ReconstructedValue& v : rec.values) {
      max_err = std::max(max_err,
                         std::abs(v.u - std::sin(rec.point[0] - 2.0 * rec.point[1])));
    }
  }
  detail = "max |u - sin(x - 2t)| = " + format_double(max_err) + " over 20 points";
  return max_err <= 1e-6;
}

// Grid diagnostics: the rotational field gives K = -2 at every node and a
// Nonidentical verdict, the gradient field passes at 1e-8, and the stencil
// error on a smooth field decays at second order across 11/21/41 nodes.
bool criterion_5(std::string& detail) {
  const GridField rotational = read_grid_csv(fixture("rotational_21.csv"));
  const CommutatorField k = discrete_commutator(rotational);
  double max_err = 0.0;
  for (double v : k.entries[0].values) max_err = std::max(max_err, std::abs(v + 2.0));
  if (max_err > 1e-12) {
    detail = "max |K_12 + 2| = " + format_double(max_err);
    return false;
  }
  const NonidentityReport rot_report = exactness_verdict(rotational, 1e-6);
  if (rot_report.verdict != Verdict::Nonidentical) {
    detail = "rotational field judged Identical";
    return false;
  }

  const GridField gradient = read_grid_csv(fixture("gradient_21.csv"));
  const NonidentityReport grad_report = exactness_verdict(gradient, 1e-8);
  if (grad_report.verdict != Verdict::Identical) {
    detail = "gradient field judged Nonidentical at tol 1e-8";
    return false;
  }

  const auto stencil_error = [](std::size_t n) {
    const std::vector<GridAxis> axes = {GridAxis{"xi_1", 0.0, 1.0, n},
                                        GridAxis{"xi_2", 0.0, 1.0, n}};
    std::vector<double> a1(grid_node_count(axes)), a2(grid_node_count(axes), 0.0);
    std::size_t lin = 0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i, ++lin) a1[lin] = std::sin(axes[1].coordinate(j));
    }
    const GridField field = GridField::make(axes, {a1, a2});
    const CommutatorField k = discrete_commutator(field);
    double err = 0.0;
    lin = 0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i, ++lin) {
        err = std::max(err,
                       std::abs(k.entries[0].values[lin] + std::cos(axes[1].coordinate(j))));
      }
    }
    return err;
  };
  const double e11 = stencil_error(11);
  const double e21 = stencil_error(21);
  const double e41 = stencil_error(41);
  const double order_a = std::log2(e11 / e21);
  const double order_b = std::log2(e21 / e41);
  if (std::abs(order_a - 2.0) > 0.2 || std::abs(order_b - 2.0) > 0.2) {
    detail = "observed orders " + format_double(order_a) + ", " + format_double(order_b);
    return false;
  }
  detail = "max |K_12 + 2| = " + format_double(max_err) + ", verdicts as expected, orders " +
           format_double(order_a) + " and " + format_double(order_b);
  return true;
}

// Plane-wave potential on a Lorentzian chart: both dF and d(*F) vanish
// symbolically for F = dA.
bool criterion_6(std::string& detail) {
  const DifferentialForm a = read_form_file(fixture("maxwell_potential.form"));
  const DifferentialForm f = exterior_derivative(a);
  const DifferentialForm df = exterior_derivative(f);
  if (!df.is_zero()) {
    detail = "dF has " + std::to_string(df.terms().size()) + " surviving terms";
    return false;
  }
  const DifferentialForm dual = hodge_star(f);
  const DifferentialForm ddual = exterior_derivative(dual);
  if (!ddual.is_zero()) {
    detail = "d(*F) has " + std::to_string(ddual.terms().size()) + " surviving terms";
    return false;
  }
  detail = "dF = 0 and d(*F) = 0, both symbolic; F has " +
           std::to_string(f.terms().size()) + " terms";
  return true;
}

// The homotopy potential of d(u) recovers u(x) - u(base) for random
// polynomial u and random points.
bool criterion_7(std::string& detail) {
  std::mt19937_64 rng(0x5EED0107);
  std::uniform_int_distribution<int> dim_pick(2, 4);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  double max_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const CoordinateChart chart = euclid(dim_pick(rng));
    const Expression u = random_polynomial(rng, chart.names, 3);
    DifferentialForm scalar(chart, 0);
    scalar.add_term({}, u);
    const DifferentialForm theta = exterior_derivative(scalar);

    std::vector<double> base(chart.dimension()), at(chart.dimension());
    for (double& v : base) v = coord(rng);
    for (double& v : at) v = coord(rng);

    VariableBinding bind_base, bind_at;
    for (std::size_t i = 0; i < chart.dimension(); ++i) {
      bind_base[chart.names[i]] = base[i];
      bind_at[chart.names[i]] = at[i];
    }
    const double want = evaluate(u, bind_at) - evaluate(u, bind_base);
    const PotentialValue got = homotopy_potential(theta, base, at);
    max_err = std::max(max_err, std::abs(got.scalar() - want));
  }
  detail = "max |h - (u(x) - u(base))| = " + format_double(max_err) + " over 20 trials";
  return max_err <= 1e-6;
}

// ------------------------------------------------------------ criterion 8 --

int run_in(const std::string& dir, const std::string& args) {
  std::filesystem::create_directories(dir);
  const std::string cmd =
      "cd " + dir + " && " + g_cli + " " + args + " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs the same invocation in two scratch directories and byte-compares every
// file either run produced.
bool rerun_identical(const std::string& tag, const std::string& args, std::string& detail) {
  const std::string a = "acc8/" + tag + "_a";
  const std::string b = "acc8/" + tag + "_b";
  const int code_a = run_in(a, args);
  const int code_b = run_in(b, args);
  if (code_a != 0 || code_b != 0) {
    detail = tag + ": expected exit 0, got " + std::to_string(code_a) + " and " +
             std::to_string(code_b) + " (" + read_bytes(a + "/stderr.txt") + ")";
    return false;
  }
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const std::string& name : names) {
    if (!std::filesystem::exists(b + "/" + name)) {
      detail = tag + ": rerun did not produce " + name;
      return false;
    }
    if (read_bytes(a + "/" + name) != read_bytes(b + "/" + name)) {
      detail = tag + ": " + name + " differs between reruns";
      return false;
    }
  }
  return true;
}

bool expect_exit(const std::string& tag, const std::string& args, int want,
                 std::string& detail) {
  const int got = run_in("acc8/" + tag, args);
  if (got != want) {
    detail = tag + ": expected exit " + std::to_string(want) + ", got " + std::to_string(got);
    return false;
  }
  return true;
}

// CLI contract: byte-identical reruns of every subcommand, and the documented
// exit codes (0 success, 1 input error, 2 numerical failure).
bool criterion_8(std::string& detail) {
  std::filesystem::remove_all("acc8");
  const std::string fx = g_fixtures;
  if (!rerun_identical("closure", "closure " + fx + "/unclosed.form --out report.json", detail))
    return false;
  if (!rerun_identical("closure_csv", "closure " + fx + "/closed.form --out report.csv --format csv",
                       detail))
    return false;
  if (!rerun_identical("characteristics",
                       "characteristics " + fx + "/eikonal_in.prob --out run", detail))
    return false;
  if (!rerun_identical("split",
                       "characteristics " + fx + "/transport.prob --samples 5 --span 0.2 --out "
                       "tr --split",
                       detail))
    return false;
  if (!rerun_identical("diagnose", "diagnose " + fx + "/rotational_21.csv --out report.json",
                       detail))
    return false;
  if (!rerun_identical("potential",
                       "potential " + fx + "/closed.form --at 2,3 --at -1,0.5 --out report.json",
                       detail))
    return false;

  if (!expect_exit("ok", "closure " + fx + "/closed.form", 0, detail)) return false;
  if (!expect_exit("bad_form", "closure " + fx + "/bad.form", 1, detail)) return false;
  if (!expect_exit("bad_grid", "diagnose " + fx + "/bad_grid.csv", 1, detail)) return false;
  if (!expect_exit("missing", "closure " + fx + "/does_not_exist.form", 1, detail)) return false;
  if (!expect_exit("unclosed_potential", "potential " + fx + "/unclosed.form --at 1,1", 1,
                   detail))
    return false;
  if (!expect_exit("usage", "closure", 1, detail)) return false;
  if (!expect_exit("newton", "characteristics " + fx + "/newton_bad.prob", 2, detail))
    return false;

  detail = "6 invocations byte-identical on rerun; exit codes 0/1/2 as documented";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      args.cli = argv[++i];
    } else if (arg == "--fixtures" && i + 1 < argc) {
      args.fixtures = argv[++i];
    } else {
      args.criterion = std::atoi(argv[i]);
    }
  }
  if (args.criterion < 1 || args.criterion > 8 || args.fixtures.empty()) {
    std::cerr << "usage: acceptance <1..8> --cli <path> --fixtures <dir>\n";
    return 2;
  }
  g_fixtures = args.fixtures;
  g_cli = args.cli;

  bool ok = false;
  std::string detail;
  try {
    switch (args.criterion) {
      case 1: ok = criterion_1(detail); break;
      case 2: ok = criterion_2(detail); break;
      case 3: ok = criterion_3(detail); break;
      case 4: ok = criterion_4(detail); break;
      case 5: ok = criterion_5(detail); break;
      case 6: ok = criterion_6(detail); break;
      case 7: ok = criterion_7(detail); break;
      case 8: ok = criterion_8(detail); break;
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  std::cout << "criterion " << args.criterion << ": " << (ok ? "PASS" : "FAIL") << " ("
            << detail << ")\n";
  return ok ? 0 : 1;
}
