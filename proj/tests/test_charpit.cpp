#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sform/charpit.hpp"
#include "sform/errors.hpp"
#include "sform/expression.hpp"
#include "sform/parse.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace sform;

namespace {

PdeProblem eikonal() {
  return PdeProblem::make({"x", "y"}, "u", parse_expression("p_x^2 + p_y^2 - 1"));
}

PdeProblem transport() {
  return PdeProblem::make({"x", "t"}, "u", parse_expression("p_t + 2*p_x"));
}

PdeProblem quasilinear() {
  return PdeProblem::make({"x", "t"}, "u", parse_expression("p_t + u*p_x"));
}

// Rays leave the unit circle along the normal; the sign of the seed picks the
// outward or inward branch for Newton.
StripSpec circle_strip(double seed_sign) {
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = 0.0;
  spec.range_end = 6.0;
  spec.sample_count = 9;
  spec.x = {parse_expression("cos(r)"), parse_expression("sin(r)")};
  spec.u = Expression();
  spec.p = {std::nullopt, std::nullopt};
  const std::string sign = seed_sign < 0 ? "-2*" : "2*";
  spec.p_seed = {parse_expression(sign + "cos(r)"), parse_expression(sign + "sin(r)")};
  return spec;
}

// Line data x = r, t = 0 with both derivative components pinned analytically,
// so completion verifies instead of solving and the residuals are exact zeros.
StripSpec transport_strip(double begin, double end, std::size_t count) {
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = begin;
  spec.range_end = end;
  spec.sample_count = count;
  spec.x = {parse_expression("r"), Expression()};
  spec.u = parse_expression("sin(r)");
  spec.p = {parse_expression("cos(r)"), parse_expression("-2*cos(r)")};
  return spec;
}

StripSpec quasilinear_strip(const std::string& initial_u, double begin, double end,
                            std::size_t count) {
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = begin;
  spec.range_end = end;
  spec.sample_count = count;
  spec.x = {parse_expression("r"), Expression()};
  spec.u = parse_expression(initial_u);
  spec.p = {std::nullopt, std::nullopt};
  spec.p_seed = {parse_expression("-1"), parse_expression("1")};
  return spec;
}

Expression random_equation(std::mt19937_64& rng) {
  const std::vector<std::string> vars = {"x", "y", "u", "p_x", "p_y"};
  std::uniform_int_distribution<int> coeff(-4, 4);
  std::uniform_int_distribution<int> term_count(1, 4);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  std::uniform_int_distribution<int> extra(0, 2);
  std::uniform_int_distribution<int> expo(1, 2);
  std::uniform_int_distribution<int> wrap(0, 5);

  std::vector<Expression> terms;
  const int t = term_count(rng);
  for (int i = 0; i < t; ++i) {
    std::vector<Expression> factors = {Expression::integer(coeff(rng))};
    const int nf = 1 + extra(rng);
    for (int j = 0; j < nf; ++j) {
      Expression v = Expression::variable(vars[pick(rng)]);
      if (wrap(rng) == 0) v = sin(v);
      factors.push_back(Expression::pow(std::move(v), expo(rng)));
    }
    terms.push_back(Expression::product(std::move(factors)));
  }
  terms.push_back(Expression::variable("p_x"));
  return Expression::sum(std::move(terms));
}

Expression contract(const std::vector<Expression>& row, const CharacteristicField& field) {
  std::vector<Expression> terms;
  const std::size_t n = field.x_rate.size();
  for (std::size_t i = 0; i < n; ++i) {
    terms.push_back(row[i] * field.x_rate[i]);
    terms.push_back(row[n + i] * field.p_rate[i]);
  }
  return simplify(Expression::sum(std::move(terms)));
}

}  // namespace

TEST_CASE("problem validation rejects malformed input") {
  CHECK_THROWS_AS(PdeProblem::make({}, "u", parse_expression("p_x")), InvalidProblemError);
  CHECK_THROWS_AS(PdeProblem::make({"x"}, "u", parse_expression("u + x")), InvalidProblemError);
  CHECK_THROWS_AS(PdeProblem::make({"x"}, "u", parse_expression("p_x + q")), InvalidProblemError);
  CHECK_THROWS_AS(PdeProblem::make({"x", "x"}, "u", parse_expression("p_x")), InvalidProblemError);
  CHECK_THROWS_AS(PdeProblem::make({"x"}, "x", parse_expression("p_x")), InvalidProblemError);
  CHECK_THROWS_AS(PdeProblem::make({"x"}, "p_x", parse_expression("p_x")), InvalidProblemError);

  const PdeProblem prob = eikonal();
  CHECK(prob.dimension() == 2);
  CHECK(prob.momenta == std::vector<std::string>{"p_x", "p_y"});
}

TEST_CASE("closure system lists the differential coefficients") {
  const ClosureSystem sys = build_closure_system(eikonal());
  REQUIRE(sys.rows.size() == 3);
  REQUIRE(sys.rows[0].size() == 4);
  CHECK(sys.rows[0][0].is_zero());
  CHECK(sys.rows[0][1].is_zero());
  CHECK(to_string(sys.rows[0][2]) == "2*p_x");
  CHECK(to_string(sys.rows[0][3]) == "2*p_y");

  const ClosureSystem lin = build_closure_system(transport());
  CHECK(lin.rows[0][0].is_zero());
  CHECK(lin.rows[0][1].is_zero());
  CHECK(to_string(lin.rows[0][2]) == "2");
  CHECK(to_string(lin.rows[0][3]) == "1");

  const ClosureSystem quasi = build_closure_system(quasilinear());
  CHECK(to_string(quasi.rows[0][0]) == "p_x^2");
  CHECK(to_string(quasi.rows[0][1]) == "p_t*p_x");
  CHECK(to_string(quasi.rows[0][2]) == "u");
  CHECK(to_string(quasi.rows[0][3]) == "1");
}

TEST_CASE("characteristic field matches the hand-derived rates") {
  const CharacteristicField ray = characteristic_field(eikonal());
  CHECK(to_string(ray.x_rate[0]) == "2*p_x");
  CHECK(to_string(ray.x_rate[1]) == "2*p_y");
  CHECK(ray.p_rate[0].is_zero());
  CHECK(ray.p_rate[1].is_zero());
  CHECK(to_string(ray.u_rate) == "2*p_x^2 + 2*p_y^2");

  const CharacteristicField burger = characteristic_field(quasilinear());
  CHECK(to_string(burger.x_rate[0]) == "u");
  CHECK(to_string(burger.x_rate[1]) == "1");
  CHECK(to_string(burger.p_rate[0]) == "-p_x^2");
  CHECK(to_string(burger.p_rate[1]) == "-p_t*p_x");
  CHECK(to_string(burger.u_rate) == "p_t + u*p_x");
}

TEST_CASE("every closure row annihilates the characteristic direction") {
  std::vector<PdeProblem> probs = {eikonal(), transport(), quasilinear(),
                                   PdeProblem::make({"x", "y"}, "u",
                                                    parse_expression("sin(p_x*x) + u*p_y^2 - exp(y)"))};
  std::mt19937_64 rng(0x5EED0010ULL);
  for (int trial = 0; trial < 30; ++trial) {
    probs.push_back(PdeProblem::make({"x", "y"}, "u", random_equation(rng)));
  }

  for (const PdeProblem& prob : probs) {
    const ClosureSystem sys = build_closure_system(prob);
    const CharacteristicField field = characteristic_field(prob);
    for (const std::vector<Expression>& row : sys.rows) {
      CHECK(contract(row, field).is_zero());
    }
  }
}

TEST_CASE("the strip condition holds along the field as an identity") {
  std::mt19937_64 rng(0x5EED0011ULL);
  for (int trial = 0; trial < 30; ++trial) {
    const PdeProblem prob = PdeProblem::make({"x", "y"}, "u", random_equation(rng));
    const CharacteristicField field = characteristic_field(prob);
    std::vector<Expression> terms = {field.u_rate};
    for (std::size_t i = 0; i < prob.dimension(); ++i) {
      terms.push_back(Expression::negate(Expression::variable(prob.momenta[i]) * field.x_rate[i]));
    }
    CHECK(simplify(Expression::sum(std::move(terms))).is_zero());
  }
}

TEST_CASE("strip completion solves for both derivative components") {
  const InitialStrip strip = complete_initial_strip(quasilinear(),
                                                    quasilinear_strip("-r", -2.0, 2.0, 5));
  REQUIRE(strip.samples.size() == 5);
  for (const StripSample& s : strip.samples) {
    CHECK(std::abs(s.p[0] + 1.0) <= 1e-9);
    CHECK(std::abs(s.p[1] + s.r) <= 1e-9);
    CHECK(s.u == -s.r);
  }

  const InitialStrip circle = complete_initial_strip(eikonal(), circle_strip(+1.0));
  for (const StripSample& s : circle.samples) {
    CHECK(std::abs(s.p[0] - std::cos(s.r)) <= 1e-8);
    CHECK(std::abs(s.p[1] - std::sin(s.r)) <= 1e-8);
  }

  const InitialStrip inward = complete_initial_strip(eikonal(), circle_strip(-1.0));
  for (const StripSample& s : inward.samples) {
    CHECK(std::abs(s.p[0] + std::cos(s.r)) <= 1e-8);
    CHECK(std::abs(s.p[1] + std::sin(s.r)) <= 1e-8);
  }
}

TEST_CASE("strip completion honors pinned components") {
  const InitialStrip strip = complete_initial_strip(transport(), transport_strip(-1.0, 1.0, 9));
  for (const StripSample& s : strip.samples) {
    CHECK(s.p[0] == std::cos(s.r));
    CHECK(s.p[1] == -2.0 * std::cos(s.r));
  }

  // One pinned component leaves a single Newton unknown.
  StripSpec half = quasilinear_strip("-r", -1.0, 1.0, 5);
  half.p[0] = parse_expression("-1");
  half.p_seed = {};
  const InitialStrip mixed = complete_initial_strip(quasilinear(), half);
  for (const StripSample& s : mixed.samples) {
    CHECK(s.p[0] == -1.0);
    CHECK(std::abs(s.p[1] + s.r) <= 1e-9);
  }
}

TEST_CASE("strip completion failure modes") {
  StripSpec bad = transport_strip(-1.0, 1.0, 5);
  bad.p = {parse_expression("1"), parse_expression("1")};
  CHECK_THROWS_AS(complete_initial_strip(transport(), bad), OverdeterminedStripError);

  StripSpec flat = circle_strip(+1.0);
  flat.p_seed = {Expression(), Expression()};
  try {
    complete_initial_strip(eikonal(), flat);
    FAIL("expected Newton divergence");
  } catch (const NewtonDivergenceError& e) {
    CHECK(e.sample_index() == 0);
  }

  const PdeProblem wide = PdeProblem::make({"a", "b", "c"}, "u",
                                           parse_expression("p_a + p_b + p_c"));
  StripSpec under;
  under.param = "r";
  under.range_begin = 0.0;
  under.range_end = 1.0;
  under.sample_count = 3;
  under.x = {parse_expression("r"), parse_expression("r"), parse_expression("r")};
  under.u = Expression();
  CHECK_THROWS_AS(complete_initial_strip(wide, under), InvalidProblemError);

  StripSpec short_range = transport_strip(-1.0, 1.0, 1);
  CHECK_THROWS_AS(complete_initial_strip(transport(), short_range), InvalidProblemError);

  StripSpec stray = transport_strip(-1.0, 1.0, 5);
  stray.u = parse_expression("sin(q)");
  CHECK_THROWS_AS(complete_initial_strip(transport(), stray), InvalidProblemError);
}

TEST_CASE("integration reproduces straight rays out of the circle") {
  const PdeProblem prob = eikonal();
  const InitialStrip strip = complete_initial_strip(prob, circle_strip(+1.0));
  const auto trajs = integrate_characteristics(prob, strip, 1.0, 1e-2);
  REQUIRE(trajs.size() == strip.samples.size());

  for (const CharacteristicTrajectory& traj : trajs) {
    CHECK(traj.termination == Termination::SpanEnd);
    REQUIRE(traj.samples.size() == 101);
    CHECK(traj.samples[50].s == 50 * 1e-2);
    for (std::size_t k : {std::size_t{25}, std::size_t{50}, std::size_t{100}}) {
      const TrajectorySample& s = traj.samples[k];
      const double radius = 1.0 + 2.0 * s.s;
      CHECK(std::abs(s.x[0] - radius * std::cos(traj.r)) <= 1e-8);
      CHECK(std::abs(s.x[1] - radius * std::sin(traj.r)) <= 1e-8);
      CHECK(std::abs(s.u - 2.0 * s.s) <= 1e-8);
    }
    CHECK(conservation_check(traj) <= 1e-9);
  }
}

TEST_CASE("transport conserves the equation exactly and carries the profile") {
  const PdeProblem prob = transport();
  const InitialStrip strip = complete_initial_strip(prob, transport_strip(-1.0, 1.0, 9));
  const auto trajs = integrate_characteristics(prob, strip, 10.0, 1e-2);

  for (std::size_t j = 0; j < trajs.size(); ++j) {
    CHECK(trajs[j].termination == Termination::SpanEnd);
    CHECK(conservation_check(trajs[j]) == 0.0);
    const TrajectorySample& last = trajs[j].samples.back();
    CHECK(last.u == std::sin(trajs[j].r));
    CHECK(std::abs(last.x[0] - (trajs[j].r + 2.0 * last.s)) <= 1e-9);
    CHECK(std::abs(last.x[1] - last.s) <= 1e-9);
    for (const TrajectorySample& s : trajs[j].samples) {
      CHECK(s.p[0] == strip.samples[j].p[0]);
      CHECK(s.p[1] == strip.samples[j].p[1]);
    }
  }
}

TEST_CASE("quasilinear momentum follows its closed form until blowup") {
  const PdeProblem prob = quasilinear();
  const InitialStrip strip = complete_initial_strip(prob, quasilinear_strip("-r", 0.3, 0.7, 3));

  // p_x obeys dp/ds = -p^2 from p(0) = -1, so p_x(s) = -1/(1 - s).
  const auto fine = integrate_characteristics(prob, strip, 0.9, 1e-3);
  for (const CharacteristicTrajectory& traj : fine) {
    CHECK(traj.termination == Termination::SpanEnd);
    const TrajectorySample& last = traj.samples.back();
    CHECK(last.s == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(std::abs(last.p[0] + 10.0) <= 1e-4);
    CHECK(std::abs(last.u + traj.r) <= 1e-6);
    CHECK(conservation_check(traj) <= 1e-6);
  }

  const auto long_run = integrate_characteristics(prob, strip, 2.0, 1e-2);
  for (const CharacteristicTrajectory& traj : long_run) {
    CHECK(traj.termination == Termination::Blowup);
    const double end = traj.samples.back().s;
    CHECK(end > 0.9);
    CHECK(end < 1.1);
    for (const TrajectorySample& s : traj.samples) {
      CHECK(std::isfinite(s.p[0]));
      CHECK(std::abs(s.p[0]) <= 1e12);
    }
  }
}

TEST_CASE("halving the step cuts the conservation residual eighth-fold") {
  // The equation value is a first integral of the characteristic field, so
  // the residual is pure integrator drift. The transport and straight-ray
  // fixtures conserve it to the bit; this coupled equation drifts at a
  // measurable fourth order instead.
  const PdeProblem prob = PdeProblem::make({"x", "y"}, "u",
                                           parse_expression("p_x*p_y - u - x"));
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = 0.5;
  spec.range_end = 1.5;
  spec.sample_count = 3;
  spec.x = {Expression(), parse_expression("r")};
  spec.u = parse_expression("r^2");
  spec.p = {std::nullopt, std::nullopt};
  spec.p_seed = {parse_expression("1"), parse_expression("2*r")};
  const InitialStrip strip = complete_initial_strip(prob, spec);
  for (const StripSample& s : strip.samples) {
    CHECK(std::abs(s.p[0] - s.r / 2.0) <= 1e-9);
    CHECK(std::abs(s.p[1] - 2.0 * s.r) <= 1e-9);
  }

  const auto coarse = integrate_characteristics(prob, strip, 0.9, 2e-2);
  const auto fine = integrate_characteristics(prob, strip, 0.9, 1e-2);
  const double coarse_res = conservation_check(coarse[1]);
  const double fine_res = conservation_check(fine[1]);
  CHECK(coarse_res > 1e-13);  // above the rounding floor, so the ratio is meaningful
  CHECK(coarse_res / fine_res >= 8.0);
  CHECK(coarse_res <= 1e-6);
}

TEST_CASE("relabeling coordinates permutes trajectories bitwise") {
  const PdeProblem plain = quasilinear();
  const PdeProblem flipped = PdeProblem::make({"t", "x"}, "u", parse_expression("p_t + u*p_x"));

  StripSpec spec_a = quasilinear_strip("-r", -1.0, 1.0, 5);
  spec_a.p = {parse_expression("-1"), parse_expression("-r")};
  spec_a.p_seed = {};

  StripSpec spec_b = spec_a;
  spec_b.x = {Expression(), parse_expression("r")};
  spec_b.p = {parse_expression("-r"), parse_expression("-1")};

  const auto a = integrate_characteristics(plain, complete_initial_strip(plain, spec_a), 0.9, 1e-2);
  const auto b = integrate_characteristics(flipped, complete_initial_strip(flipped, spec_b), 0.9, 1e-2);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    REQUIRE(a[j].samples.size() == b[j].samples.size());
    CHECK(a[j].termination == b[j].termination);
    for (std::size_t k = 0; k < a[j].samples.size(); ++k) {
      const TrajectorySample& sa = a[j].samples[k];
      const TrajectorySample& sb = b[j].samples[k];
      CHECK(sa.s == sb.s);
      CHECK(sa.u == sb.u);
      CHECK(sa.f_residual == sb.f_residual);
      CHECK(sa.x[0] == sb.x[1]);
      CHECK(sa.x[1] == sb.x[0]);
      CHECK(sa.p[0] == sb.p[1]);
      CHECK(sa.p[1] == sb.p[0]);
    }
  }
}

TEST_CASE("a domain fault mid-integration ends the trajectory as DomainExit") {
  // dx/ds = -1 drives x through zero at s = x(r), where sqrt leaves its
  // domain; u(r) integrates the strip condition du/dr = p * dx/dr.
  const PdeProblem prob = PdeProblem::make({"x"}, "u", parse_expression("sqrt(x) - p_x"));
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = 0.0;
  spec.range_end = 1.0;
  spec.sample_count = 4;
  spec.x = {parse_expression("1.305 + 0.2*r")};
  spec.u = parse_expression("(2/3)*(1.305 + 0.2*r)*sqrt(1.305 + 0.2*r)");
  spec.p = {std::nullopt};
  spec.p_seed = {parse_expression("1")};

  const InitialStrip strip = complete_initial_strip(prob, spec);
  for (const StripSample& s : strip.samples) {
    CHECK(std::abs(s.p[0] - std::sqrt(1.305 + 0.2 * s.r)) <= 1e-9);
  }

  const auto trajs = integrate_characteristics(prob, strip, 3.0, 1e-2);
  for (const CharacteristicTrajectory& traj : trajs) {
    CHECK(traj.termination == Termination::DomainExit);
    const double end = traj.samples.back().s;
    CHECK(end > 1.0);
    CHECK(std::abs(end - (1.305 + 0.2 * traj.r)) <= 0.03);
  }
}

TEST_CASE("an unevaluable strip start raises an evaluation error") {
  const PdeProblem prob = PdeProblem::make({"x"}, "u", parse_expression("p_x + log(x)"));
  InitialStrip strip;
  strip.param = "r";
  strip.range_begin = 0.0;
  strip.range_end = 1.0;
  strip.samples = {{0.0, {-1.0}, 0.0, {1.0}}};
  CHECK_THROWS_AS(integrate_characteristics(prob, strip, 1.0, 1e-2), EvaluationError);
}

TEST_CASE("reconstruction recovers the transported profile") {
  const PdeProblem prob = transport();
  const InitialStrip strip = complete_initial_strip(prob, transport_strip(-1.0, 1.0, 201));
  const auto trajs = integrate_characteristics(prob, strip, 0.6, 1e-2);

  const auto results = reconstruct_solution(trajs, {{1.0, 0.5}, {1.3, 0.25}});
  REQUIRE(results.size() == 2);

  REQUIRE(results[0].values.size() == 1);
  CHECK(std::abs(results[0].values[0].u) <= 1e-6);
  CHECK(std::abs(results[0].values[0].r) <= 1e-6);
  CHECK(std::abs(results[0].values[0].s - 0.5) <= 1e-6);

  REQUIRE(results[1].values.size() == 1);
  CHECK(std::abs(results[1].values[0].u - std::sin(0.8)) <= 1e-6);

  CHECK_THROWS_AS(reconstruct_solution(trajs, {{50.0, 0.5}}), OutsideCoverageError);
  try {
    reconstruct_solution(trajs, {{-30.0, 0.1}});
    FAIL("expected coverage failure");
  } catch (const OutsideCoverageError& e) {
    CHECK(e.point() == std::vector<double>{-30.0, 0.1});
  }

  const std::vector<CharacteristicTrajectory> lone(trajs.begin(), trajs.begin() + 1);
  CHECK_THROWS_AS(reconstruct_solution(lone, {{0.0, 0.0}}), InsufficientTrajectoriesError);
}

TEST_CASE("one-coordinate problems cannot span a patch") {
  const PdeProblem prob = PdeProblem::make({"x"}, "u", parse_expression("p_x - 1"));
  StripSpec spec;
  spec.param = "r";
  spec.range_begin = 0.0;
  spec.range_end = 1.0;
  spec.sample_count = 3;
  spec.x = {parse_expression("r")};
  spec.u = parse_expression("r");
  spec.p = {parse_expression("1")};
  const auto trajs = integrate_characteristics(prob, complete_initial_strip(prob, spec), 1.0, 0.1);
  CHECK_THROWS_AS(reconstruct_solution(trajs, {{0.5, 0.5}}), UnsupportedDimensionError);
  CHECK_THROWS_AS(detect_degeneracy(trajs), UnsupportedDimensionError);
}

TEST_CASE("reconstruction counts folded sheets past the caustic") {
  const PdeProblem prob = quasilinear();
  const InitialStrip strip = complete_initial_strip(prob, quasilinear_strip("-tanh(r)", -2.0, 2.0, 81));
  const auto trajs = integrate_characteristics(prob, strip, 2.0, 1e-2);

  // Before any characteristics cross, the patch is single-sheeted.
  const auto early = reconstruct_solution(trajs, {{0.0, 0.5}});
  REQUIRE(early[0].values.size() == 1);
  CHECK(std::abs(early[0].values[0].u) <= 1e-3);

  // Past the first crossing the two surviving outer sheets both cover x = 0.
  // x(r, 1.5) = r - 1.5*tanh(r) vanishes near r = +/-1.32 where u = -/+0.866.
  const auto late = reconstruct_solution(trajs, {{0.0, 1.5}});
  CHECK(late[0].values.size() >= 2);
  bool has_lower = false;
  bool has_upper = false;
  for (const ReconstructedValue& v : late[0].values) {
    if (std::abs(v.u + 0.8657) <= 0.02) has_lower = true;
    if (std::abs(v.u - 0.8657) <= 0.02) has_upper = true;
  }
  CHECK(has_lower);
  CHECK(has_upper);
}

TEST_CASE("degeneracy detection brackets the caustic parameter") {
  // The slowest characteristics (near r = 0, where the profile slope is -1)
  // cross first at s = 1; pairs straddling the center flip their discrete
  // Jacobian while both rays are still alive.
  const PdeProblem prob = quasilinear();
  const InitialStrip strip = complete_initial_strip(prob, quasilinear_strip("-tanh(r)", -2.0, 2.0, 81));
  const auto trajs = integrate_characteristics(prob, strip, 2.0, 1e-2);

  const DegeneracyReport report = detect_degeneracy(trajs);
  REQUIRE(report.crossing_s.has_value());
  CHECK(std::abs(*report.crossing_s - 1.0) <= 0.05);
  CHECK(!report.sign_changes.empty());
  REQUIRE(report.determinants.size() == trajs.size() - 1);
}

TEST_CASE("inward rays focus at half the radius") {
  const PdeProblem prob = eikonal();
  const InitialStrip strip = complete_initial_strip(prob, circle_strip(-1.0));
  const auto trajs = integrate_characteristics(prob, strip, 1.0, 1e-2);

  const DegeneracyReport report = detect_degeneracy(trajs);
  REQUIRE(report.crossing_s.has_value());
  CHECK(std::abs(*report.crossing_s - 0.5) <= 0.02);
}

TEST_CASE("straight transport never degenerates") {
  const PdeProblem prob = transport();
  const InitialStrip strip = complete_initial_strip(prob, transport_strip(-1.0, 1.0, 9));
  const auto trajs = integrate_characteristics(prob, strip, 10.0, 1e-2);

  const DegeneracyReport report = detect_degeneracy(trajs);
  CHECK(!report.crossing_s.has_value());
  CHECK(report.sign_changes.empty());
  for (const std::vector<double>& row : report.determinants) {
    for (double det : row) CHECK(det < 0.0);
  }
}
