#pragma once

#include "sform/expression.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sform {

// First-order scalar PDE F(x^1..x^n, u, p_1..p_n) = 0, with p_i the slot name
// standing for du/dx^i. Momenta are derived as "p_" + coordinate name.
struct PdeProblem {
  std::vector<std::string> coordinates;
  std::string unknown;
  std::vector<std::string> momenta;
  Expression equation;

  static PdeProblem make(std::vector<std::string> coordinates, std::string unknown,
                         Expression equation);

  std::size_t dimension() const { return coordinates.size(); }
};

// Homogeneous system over the differentials (dx^1..dx^n, dp_1..dp_n). Row 0
// carries the coefficients of dF: (dF/dx^i + p_i dF/du) against dx^i and
// dF/dp_i against dp_i. Row 1+i pairs dp_i with dx^i along the curve
// (P_i dx^i - X^i dp_i = 0), so every row annihilates the characteristic
// direction.
struct ClosureSystem {
  std::vector<std::vector<Expression>> rows;
};

ClosureSystem build_closure_system(const PdeProblem& prob);

// Characteristic rates with the affine parameter fixed by dx^i/ds = dF/dp_i:
// dp_i/ds = -(dF/dx^i + p_i dF/du) and du/ds = sum_i p_i dF/dp_i.
struct CharacteristicField {
  std::vector<Expression> x_rate;
  std::vector<Expression> p_rate;
  Expression u_rate;
};

CharacteristicField characteristic_field(const PdeProblem& prob);

struct StripSample {
  double r = 0.0;
  std::vector<double> x;
  double u = 0.0;
  std::vector<double> p;
};

// Curve of consistent initial data: |F| and the strip condition
// |du/dr - sum_i p_i dx^i/dr| are at most 1e-10 at every sample.
struct InitialStrip {
  std::string param;
  double range_begin = 0.0;
  double range_end = 0.0;
  std::vector<StripSample> samples;
};

// User-facing strip data before completion. x^i(r) and u(r) are required
// expressions in the parameter; each p_i(r) is either pinned exactly or left
// for Newton to determine, optionally starting from a seed expression
// (default seed 1).
struct StripSpec {
  std::string param;
  double range_begin = 0.0;
  double range_end = 1.0;
  std::size_t sample_count = 0;
  std::vector<Expression> x;
  Expression u;
  std::vector<std::optional<Expression>> p;
  std::vector<std::optional<Expression>> p_seed;
};

InitialStrip complete_initial_strip(const PdeProblem& prob, const StripSpec& spec);

struct TrajectorySample {
  double s = 0.0;
  std::vector<double> x;
  double u = 0.0;
  std::vector<double> p;
  double f_residual = 0.0;
};

enum class Termination { SpanEnd, Blowup, DomainExit };

struct CharacteristicTrajectory {
  double r = 0.0;
  std::vector<TrajectorySample> samples;
  Termination termination = Termination::SpanEnd;
};

// Classical fixed-step RK4 on the 2n+1 characteristic system, one trajectory
// per strip sample. A state whose magnitude passes 1e12 (or stops being
// finite) ends its trajectory with Blowup; a domain fault after the first
// sample ends it with DomainExit.
std::vector<CharacteristicTrajectory> integrate_characteristics(const PdeProblem& prob,
                                                                const InitialStrip& strip,
                                                                double span,
                                                                double step = 1e-2);

double conservation_check(const CharacteristicTrajectory& traj);

struct ReconstructedValue {
  double u = 0.0;
  double r = 0.0;
  double s = 0.0;
};

// One query point with every (r, s) patch value found there. values.size() is
// the multiplicity; more than one value means crossed characteristics.
struct Reconstruction {
  std::vector<double> point;
  std::vector<ReconstructedValue> values;
};

std::vector<Reconstruction> reconstruct_solution(
    const std::vector<CharacteristicTrajectory>& trajectories,
    const std::vector<std::vector<double>>& points);

struct DegeneracyCell {
  double r = 0.0;
  double s = 0.0;
};

// Sign-change cells of the discrete strip Jacobian det d(x)/d(s, r), with the
// earliest crossing parameter when one exists.
struct DegeneracyReport {
  std::optional<double> crossing_s;
  std::vector<DegeneracyCell> sign_changes;
  std::vector<std::vector<double>> determinants;
};

DegeneracyReport detect_degeneracy(const std::vector<CharacteristicTrajectory>& trajectories);

}  // namespace sform
