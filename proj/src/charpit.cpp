#include "sform/charpit.hpp"

#include "sform/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <utility>

namespace sform {

namespace {

constexpr double kStripTol = 1e-10;
constexpr double kBlowupLimit = 1e12;
constexpr double kInversionTol = 1e-8;
constexpr int kNewtonMaxIter = 50;
constexpr int kNewtonMaxHalvings = 30;

// State layout shared by every numeric routine here:
// y[0..n-1] = x, y[n] = u, y[n+1..2n] = p.
std::vector<std::string> state_slots(const PdeProblem& prob) {
  std::vector<std::string> slots = prob.coordinates;
  slots.push_back(prob.unknown);
  slots.insert(slots.end(), prob.momenta.begin(), prob.momenta.end());
  return slots;
}

double infinity_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

PdeProblem PdeProblem::make(std::vector<std::string> coordinates, std::string unknown,
                            Expression equation) {
  if (coordinates.empty()) {
    throw InvalidProblemError("problem needs at least one coordinate");
  }
  PdeProblem prob;
  prob.coordinates = std::move(coordinates);
  prob.unknown = std::move(unknown);
  for (const std::string& c : prob.coordinates) {
    if (c.empty()) throw InvalidProblemError("empty coordinate name");
    prob.momenta.push_back("p_" + c);
  }
  if (prob.unknown.empty()) throw InvalidProblemError("empty unknown name");

  std::set<std::string> seen;
  auto claim = [&seen](const std::string& name) {
    if (!seen.insert(name).second) {
      throw InvalidProblemError("name used twice: " + name);
    }
  };
  for (const std::string& c : prob.coordinates) claim(c);
  claim(prob.unknown);
  for (const std::string& m : prob.momenta) claim(m);

  prob.equation = simplify(equation);
  bool has_momentum = false;
  for (const std::string& v : free_variables(prob.equation)) {
    if (seen.count(v) == 0) {
      throw InvalidProblemError("equation mentions unknown symbol: " + v);
    }
    if (std::find(prob.momenta.begin(), prob.momenta.end(), v) != prob.momenta.end()) {
      has_momentum = true;
    }
  }
  if (!has_momentum) {
    throw InvalidProblemError("equation involves no derivative slot p_i");
  }
  return prob;
}

CharacteristicField characteristic_field(const PdeProblem& prob) {
  const Expression& f = prob.equation;
  const std::size_t n = prob.dimension();
  Expression f_u = differentiate(f, prob.unknown);

  CharacteristicField field;
  std::vector<Expression> u_terms;
  for (std::size_t i = 0; i < n; ++i) {
    Expression f_p = simplify(differentiate(f, prob.momenta[i]));
    Expression f_x = differentiate(f, prob.coordinates[i]);
    Expression p_i = Expression::variable(prob.momenta[i]);
    field.x_rate.push_back(f_p);
    field.p_rate.push_back(simplify(Expression::negate(f_x + p_i * f_u)));
    u_terms.push_back(p_i * f_p);
  }
  field.u_rate = simplify(Expression::sum(std::move(u_terms)));
  return field;
}

ClosureSystem build_closure_system(const PdeProblem& prob) {
  const std::size_t n = prob.dimension();
  const Expression& f = prob.equation;
  Expression f_u = differentiate(f, prob.unknown);
  Expression zero;

  ClosureSystem sys;
  sys.rows.assign(n + 1, std::vector<Expression>(2 * n, zero));
  for (std::size_t i = 0; i < n; ++i) {
    Expression p_i = Expression::variable(prob.momenta[i]);
    Expression dx_coeff = simplify(differentiate(f, prob.coordinates[i]) + p_i * f_u);
    Expression dp_coeff = simplify(differentiate(f, prob.momenta[i]));
    sys.rows[0][i] = dx_coeff;
    sys.rows[0][n + i] = dp_coeff;
    // P_i dx^i - X^i dp_i = 0 along the curve.
    sys.rows[1 + i][i] = simplify(Expression::negate(dx_coeff));
    sys.rows[1 + i][n + i] = simplify(Expression::negate(dp_coeff));
  }
  return sys;
}

InitialStrip complete_initial_strip(const PdeProblem& prob, const StripSpec& spec) {
  const std::size_t n = prob.dimension();
  if (spec.x.size() != n) {
    throw InvalidProblemError("strip provides " + std::to_string(spec.x.size()) +
                              " coordinate expressions for a problem of dimension " +
                              std::to_string(n));
  }
  if (!spec.p.empty() && spec.p.size() != n) {
    throw InvalidProblemError("strip derivative list length does not match dimension");
  }
  if (!spec.p_seed.empty() && spec.p_seed.size() != n) {
    throw InvalidProblemError("strip seed list length does not match dimension");
  }
  if (spec.param.empty()) throw InvalidProblemError("strip has no parameter name");
  if (spec.sample_count < 2) {
    throw InvalidProblemError("strip needs at least two samples");
  }
  if (!(spec.range_end > spec.range_begin)) {
    throw InvalidProblemError("strip range is empty");
  }

  auto check_param_only = [&spec](const Expression& e, const char* what) {
    for (const std::string& v : free_variables(e)) {
      if (v != spec.param) {
        throw InvalidProblemError(std::string(what) + " depends on symbol other than the strip parameter: " + v);
      }
    }
  };
  for (const Expression& e : spec.x) check_param_only(e, "strip coordinate");
  check_param_only(spec.u, "strip unknown");
  for (const auto& e : spec.p) {
    if (e) check_param_only(*e, "strip derivative");
  }
  for (const auto& e : spec.p_seed) {
    if (e) check_param_only(*e, "strip seed");
  }

  std::vector<std::size_t> unknown;
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.p.empty() || !spec.p[i]) unknown.push_back(i);
  }
  if (unknown.size() > 2) {
    throw InvalidProblemError("strip leaves more than two derivative components unknown");
  }

  std::vector<Expression> x_rate_r;
  for (const Expression& e : spec.x) x_rate_r.push_back(differentiate(e, spec.param));
  Expression u_rate_r = differentiate(spec.u, spec.param);

  InitialStrip strip;
  strip.param = spec.param;
  strip.range_begin = spec.range_begin;
  strip.range_end = spec.range_end;

  const double dr = (spec.range_end - spec.range_begin) / static_cast<double>(spec.sample_count - 1);
  for (std::size_t k = 0; k < spec.sample_count; ++k) {
    StripSample sample;
    sample.r = spec.range_begin + static_cast<double>(k) * dr;
    VariableBinding rb{{spec.param, sample.r}};

    sample.x.resize(n);
    sample.p.resize(n);
    std::vector<double> dxdr(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample.x[i] = evaluate(spec.x[i], rb);
      dxdr[i] = evaluate(x_rate_r[i], rb);
    }
    sample.u = evaluate(spec.u, rb);
    const double dudr = evaluate(u_rate_r, rb);

    for (std::size_t i = 0; i < n; ++i) {
      if (!spec.p.empty() && spec.p[i]) {
        sample.p[i] = evaluate(*spec.p[i], rb);
      } else if (!spec.p_seed.empty() && spec.p_seed[i]) {
        sample.p[i] = evaluate(*spec.p_seed[i], rb);
      } else {
        sample.p[i] = 1.0;
      }
    }

    VariableBinding state;
    auto bind_state = [&] {
      for (std::size_t i = 0; i < n; ++i) state[prob.coordinates[i]] = sample.x[i];
      state[prob.unknown] = sample.u;
      for (std::size_t i = 0; i < n; ++i) state[prob.momenta[i]] = sample.p[i];
    };
    auto f_residual = [&] {
      bind_state();
      return evaluate(prob.equation, state);
    };
    auto strip_residual = [&] {
      double acc = dudr;
      for (std::size_t i = 0; i < n; ++i) acc -= sample.p[i] * dxdr[i];
      return acc;
    };

    if (!unknown.empty()) {
      // Newton on the square subsystem: F = 0 first, the strip condition as
      // the second equation when two components are free. With a single free
      // component the better-conditioned equation is solved and the other one
      // is verified afterwards.
      std::vector<Expression> f_grad;
      for (std::size_t j : unknown) f_grad.push_back(differentiate(prob.equation, prob.momenta[j]));

      bool strip_only = false;
      if (unknown.size() == 1) {
        bind_state();
        const double df = evaluate(f_grad[0], state);
        strip_only = std::abs(dxdr[unknown[0]]) > std::abs(df);
      }

      auto residual_vec = [&]() -> std::vector<double> {
        if (unknown.size() == 2) return {f_residual(), strip_residual()};
        return {strip_only ? strip_residual() : f_residual()};
      };

      std::vector<double> res = residual_vec();
      bool converged = infinity_norm(res) <= kStripTol;
      for (int iter = 0; iter < kNewtonMaxIter && !converged; ++iter) {
        bind_state();
        std::vector<double> delta(unknown.size());
        if (unknown.size() == 2) {
          const double a = evaluate(f_grad[0], state);
          const double b = evaluate(f_grad[1], state);
          const double c = -dxdr[unknown[0]];
          const double d = -dxdr[unknown[1]];
          const double det = a * d - b * c;
          const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
          if (std::abs(det) <= 1e-14 * scale * scale) throw NewtonDivergenceError(k);
          delta[0] = -(d * res[0] - b * res[1]) / det;
          delta[1] = -(a * res[1] - c * res[0]) / det;
        } else {
          const double g = strip_only ? -dxdr[unknown[0]] : evaluate(f_grad[0], state);
          if (std::abs(g) <= 1e-14 * std::max(1.0, std::abs(g))) throw NewtonDivergenceError(k);
          delta[0] = -res[0] / g;
        }

        const double base_norm = infinity_norm(res);
        std::vector<double> saved;
        for (std::size_t j : unknown) saved.push_back(sample.p[j]);
        double lambda = 1.0;
        for (int h = 0; h <= kNewtonMaxHalvings; ++h) {
          for (std::size_t c = 0; c < unknown.size(); ++c) {
            sample.p[unknown[c]] = saved[c] + lambda * delta[c];
          }
          res = residual_vec();
          if (infinity_norm(res) < base_norm) break;
          if (h == kNewtonMaxHalvings) throw NewtonDivergenceError(k);
          lambda *= 0.5;
        }
        converged = infinity_norm(res) <= kStripTol;
      }
      if (!converged) throw NewtonDivergenceError(k);
    }

    const double fr = std::abs(f_residual());
    const double sr = std::abs(strip_residual());
    if (fr > kStripTol || sr > kStripTol) {
      std::ostringstream msg;
      msg << "strip sample " << k << " is inconsistent: |F| = " << fr
          << ", strip condition residual = " << sr;
      throw OverdeterminedStripError(msg.str());
    }
    strip.samples.push_back(std::move(sample));
  }
  return strip;
}

std::vector<CharacteristicTrajectory> integrate_characteristics(const PdeProblem& prob,
                                                                const InitialStrip& strip,
                                                                double span, double step) {
  if (strip.samples.empty()) throw Error("initial strip has no samples");
  if (!(span > 0.0)) throw Error("integration span must be positive");
  if (!(step > 0.0)) throw Error("integration step must be positive");

  const std::size_t n = prob.dimension();
  const std::size_t dim = 2 * n + 1;
  const std::vector<std::string> slots = state_slots(prob);
  const CharacteristicField field = characteristic_field(prob);

  std::vector<CompiledExpression> rate;
  rate.reserve(dim);
  for (std::size_t i = 0; i < n; ++i) rate.emplace_back(field.x_rate[i], slots);
  rate.emplace_back(field.u_rate, slots);
  for (std::size_t i = 0; i < n; ++i) rate.emplace_back(field.p_rate[i], slots);
  const CompiledExpression f(prob.equation, slots);

  auto rhs = [&rate, dim](const std::vector<double>& y, std::vector<double>& dy) {
    for (std::size_t c = 0; c < dim; ++c) dy[c] = rate[c](y);
  };

  // Every trajectory shares the parameter grid s_k = k * step, so the swept
  // patch is a rectangular (r, s) lattice downstream.
  const auto full_steps = static_cast<std::size_t>(std::floor(span / step + 1e-9));
  const double remainder = span - static_cast<double>(full_steps) * step;

  std::vector<CharacteristicTrajectory> trajectories;
  trajectories.reserve(strip.samples.size());
  for (const StripSample& start : strip.samples) {
    if (start.x.size() != n || start.p.size() != n) {
      throw Error("strip sample dimension does not match the problem");
    }
    CharacteristicTrajectory traj;
    traj.r = start.r;
    traj.termination = Termination::SpanEnd;

    std::vector<double> y(dim);
    for (std::size_t i = 0; i < n; ++i) y[i] = start.x[i];
    y[n] = start.u;
    for (std::size_t i = 0; i < n; ++i) y[n + 1 + i] = start.p[i];

    auto record = [&](double s) {
      TrajectorySample sample;
      sample.s = s;
      sample.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
      sample.u = y[n];
      sample.p.assign(y.begin() + static_cast<std::ptrdiff_t>(n) + 1, y.end());
      sample.f_residual = std::abs(f(y));
      traj.samples.push_back(std::move(sample));
    };

    try {
      record(0.0);
    } catch (const DomainError& e) {
      std::ostringstream msg;
      msg << "trajectory r = " << start.r << " cannot start: " << e.what();
      throw EvaluationError(msg.str());
    }

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), stage(dim), next(dim);
    const std::size_t total = full_steps + (remainder > 1e-9 * step ? 1 : 0);
    for (std::size_t k = 0; k < total; ++k) {
      const double h = k < full_steps ? step : remainder;
      const double s_next = k + 1 <= full_steps ? static_cast<double>(k + 1) * step : span;
      try {
        rhs(y, k1);
        for (std::size_t c = 0; c < dim; ++c) stage[c] = y[c] + 0.5 * h * k1[c];
        rhs(stage, k2);
        for (std::size_t c = 0; c < dim; ++c) stage[c] = y[c] + 0.5 * h * k2[c];
        rhs(stage, k3);
        for (std::size_t c = 0; c < dim; ++c) stage[c] = y[c] + h * k3[c];
        rhs(stage, k4);
        for (std::size_t c = 0; c < dim; ++c) {
          next[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
      } catch (const DomainError&) {
        traj.termination = Termination::DomainExit;
        break;
      }

      bool exploded = false;
      for (double c : next) {
        if (!std::isfinite(c) || std::abs(c) > kBlowupLimit) exploded = true;
      }
      if (exploded) {
        traj.termination = Termination::Blowup;
        break;
      }

      y = next;
      try {
        record(s_next);
      } catch (const DomainError&) {
        traj.termination = Termination::DomainExit;
        break;
      }
    }
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

double conservation_check(const CharacteristicTrajectory& traj) {
  if (traj.samples.empty()) throw Error("trajectory has no samples");
  double worst = 0.0;
  for (const TrajectorySample& s : traj.samples) worst = std::max(worst, s.f_residual);
  return worst;
}

namespace {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 sub(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

Vec2 at(const TrajectorySample& s) { return {s.x[0], s.x[1]}; }

// Solutions of q = P00 + alpha*a + beta*b + alpha*beta*c inside the unit cell.
// Folded cells legitimately contain two preimages; both are returned.
void invert_bilinear(const Vec2& p00, const Vec2& p10, const Vec2& p01, const Vec2& p11,
                     const Vec2& q, double scale, bool last_alpha, bool last_beta,
                     std::vector<std::pair<double, double>>& out) {
  const Vec2 d = sub(q, p00);
  const Vec2 a = sub(p10, p00);
  const Vec2 b = sub(p01, p00);
  const Vec2 c{p11.x - p10.x - p01.x + p00.x, p11.y - p10.y - p01.y + p00.y};

  const double q2 = -cross(b, c);
  const double q1 = cross(d, c) - cross(b, a);
  const double q0 = cross(d, a);

  double roots[2];
  int count = 0;
  const double coeff_scale = std::max({std::abs(q2), std::abs(q1), std::abs(q0), 1e-300});
  if (std::abs(q2) <= 1e-12 * coeff_scale) {
    if (std::abs(q1) > 1e-12 * coeff_scale) roots[count++] = -q0 / q1;
  } else {
    const double disc = q1 * q1 - 4.0 * q2 * q0;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      // Citardauq form for the second root keeps it stable when q1 dominates.
      const double t = -0.5 * (q1 + (q1 >= 0.0 ? root : -root));
      roots[count++] = t / q2;
      if (std::abs(t) > 0.0) roots[count++] = q0 / t;
    }
  }

  const double lo = -1e-9;
  for (int idx = 0; idx < count; ++idx) {
    const double beta = roots[idx];
    const double hi_beta = last_beta ? 1.0 + 1e-9 : 1.0 - 1e-9;
    if (!(beta >= lo && beta <= hi_beta)) continue;
    const Vec2 den{a.x + beta * c.x, a.y + beta * c.y};
    const Vec2 num{d.x - beta * b.x, d.y - beta * b.y};
    double alpha;
    if (std::abs(den.x) >= std::abs(den.y)) {
      if (std::abs(den.x) <= 1e-300) continue;
      alpha = num.x / den.x;
    } else {
      alpha = num.y / den.y;
    }
    const double hi_alpha = last_alpha ? 1.0 + 1e-9 : 1.0 - 1e-9;
    if (!(alpha >= lo && alpha <= hi_alpha)) continue;

    const double rx = d.x - alpha * a.x - beta * b.x - alpha * beta * c.x;
    const double ry = d.y - alpha * a.y - beta * b.y - alpha * beta * c.y;
    if (std::hypot(rx, ry) > kInversionTol * scale) continue;

    bool duplicate = false;
    for (const auto& seen : out) {
      if (std::abs(seen.first - alpha) <= 1e-9 && std::abs(seen.second - beta) <= 1e-9) {
        duplicate = true;
      }
    }
    if (!duplicate) out.emplace_back(alpha, beta);
  }
}

void require_planar(const std::vector<CharacteristicTrajectory>& trajectories) {
  if (trajectories.size() < 2) {
    throw InsufficientTrajectoriesError("need at least two trajectories");
  }
  for (const CharacteristicTrajectory& t : trajectories) {
    if (t.samples.empty()) throw InsufficientTrajectoriesError("trajectory has no samples");
    if (t.samples.front().x.size() != 2) {
      throw UnsupportedDimensionError("swept-patch operations need exactly two coordinates");
    }
  }
}

}  // namespace

std::vector<Reconstruction> reconstruct_solution(
    const std::vector<CharacteristicTrajectory>& trajectories,
    const std::vector<std::vector<double>>& points) {
  require_planar(trajectories);

  std::vector<Reconstruction> results;
  results.reserve(points.size());
  for (const std::vector<double>& q : points) {
    if (q.size() != 2) throw Error("query point must have two coordinates");
    Reconstruction rec;
    rec.point = q;
    const Vec2 qv{q[0], q[1]};
    const double scale = 1.0 + std::hypot(q[0], q[1]);

    for (std::size_t j = 0; j + 1 < trajectories.size(); ++j) {
      const CharacteristicTrajectory& ta = trajectories[j];
      const CharacteristicTrajectory& tb = trajectories[j + 1];
      const std::size_t rows = std::min(ta.samples.size(), tb.samples.size());
      const bool last_alpha = j + 2 == trajectories.size();
      for (std::size_t k = 0; k + 1 < rows; ++k) {
        const bool last_beta = k + 2 == rows;
        std::vector<std::pair<double, double>> cell_hits;
        invert_bilinear(at(ta.samples[k]), at(tb.samples[k]), at(ta.samples[k + 1]),
                        at(tb.samples[k + 1]), qv, scale, last_alpha, last_beta, cell_hits);
        for (const auto& [alpha, beta] : cell_hits) {
          ReconstructedValue v;
          const double u00 = ta.samples[k].u, u10 = tb.samples[k].u;
          const double u01 = ta.samples[k + 1].u, u11 = tb.samples[k + 1].u;
          v.u = (1.0 - alpha) * (1.0 - beta) * u00 + alpha * (1.0 - beta) * u10 +
                (1.0 - alpha) * beta * u01 + alpha * beta * u11;
          v.r = ta.r + alpha * (tb.r - ta.r);
          v.s = ta.samples[k].s + beta * (ta.samples[k + 1].s - ta.samples[k].s);
          rec.values.push_back(v);
        }
      }
    }
    if (rec.values.empty()) throw OutsideCoverageError(q);
    results.push_back(std::move(rec));
  }
  return results;
}

DegeneracyReport detect_degeneracy(const std::vector<CharacteristicTrajectory>& trajectories) {
  require_planar(trajectories);

  DegeneracyReport report;
  for (std::size_t j = 0; j + 1 < trajectories.size(); ++j) {
    const CharacteristicTrajectory& ta = trajectories[j];
    const CharacteristicTrajectory& tb = trajectories[j + 1];
    const double dr = tb.r - ta.r;
    const double r_mid = 0.5 * (ta.r + tb.r);
    const std::size_t rows = std::min(ta.samples.size(), tb.samples.size());

    // Forward differences in s, with a backward difference at the final row
    // so a crossing at the very edge of the data is still bracketed.
    std::vector<double> dets;
    for (std::size_t k = 0; rows >= 2 && k < rows; ++k) {
      const std::size_t lo = k + 1 < rows ? k : k - 1;
      const double ds = ta.samples[lo + 1].s - ta.samples[lo].s;
      const Vec2 dxds{(ta.samples[lo + 1].x[0] - ta.samples[lo].x[0]) / ds,
                      (ta.samples[lo + 1].x[1] - ta.samples[lo].x[1]) / ds};
      const Vec2 dxdr{(tb.samples[k].x[0] - ta.samples[k].x[0]) / dr,
                      (tb.samples[k].x[1] - ta.samples[k].x[1]) / dr};
      dets.push_back(cross(dxds, dxdr));
    }

    for (std::size_t k = 0; k + 1 < dets.size(); ++k) {
      const bool exact_zero = dets[k] == 0.0;
      if (exact_zero || dets[k] * dets[k + 1] < 0.0) {
        const double s_star = exact_zero ? ta.samples[k].s
                                         : 0.5 * (ta.samples[k].s + ta.samples[k + 1].s);
        report.sign_changes.push_back({r_mid, s_star});
        if (!report.crossing_s || s_star < *report.crossing_s) report.crossing_s = s_star;
      }
    }
    // A zero hit exactly on the final row has no successor for the product
    // test above; report it at the node.
    if (dets.size() >= 2 && dets.back() == 0.0) {
      const double s_star = ta.samples[dets.size() - 1].s;
      report.sign_changes.push_back({r_mid, s_star});
      if (!report.crossing_s || s_star < *report.crossing_s) report.crossing_s = s_star;
    }
    report.determinants.push_back(std::move(dets));
  }
  return report;
}

}  // namespace sform
