#pragma once

#include "sform/expression.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sform {

// Ordered coordinate frame, optionally carrying a diagonal metric signature.
struct CoordinateChart {
  std::vector<std::string> names;
  std::optional<std::vector<int>> signature;  // one entry per coordinate, each +1 or -1

  static CoordinateChart make(std::vector<std::string> names,
                              std::optional<std::vector<int>> signature = std::nullopt);

  std::size_t dimension() const { return names.size(); }
  int position(const std::string& name) const;

  friend bool operator==(const CoordinateChart&, const CoordinateChart&) = default;
};

// Coordinate positions of one basis wedge, stored strictly increasing.
using MultiIndex = std::vector<int>;

// Degree-p form as a sparse map from increasing multi-index to coefficient.
// Signs from index reordering are absorbed into coefficients on insertion, and
// coefficients that simplify to zero are never stored.
class DifferentialForm {
public:
  DifferentialForm(CoordinateChart chart, int degree, bool degree_clamped = false);

  const CoordinateChart& chart() const { return chart_; }
  int degree() const { return degree_; }
  // True only for the zero result of differentiating a top-degree form.
  bool degree_clamped() const { return degree_clamped_; }
  const std::map<MultiIndex, Expression>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(MultiIndex index, Expression coeff);
  Expression coefficient(MultiIndex index) const;

private:
  CoordinateChart chart_;
  int degree_;
  bool degree_clamped_;
  std::map<MultiIndex, Expression> terms_;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);

DifferentialForm exterior_derivative(const DifferentialForm& w);

// Antisymmetric matrix K[i][j] = d(a_j)/dx^i - d(a_i)/dx^j of a 1-form.
struct CommutatorMatrix {
  CoordinateChart chart;
  std::vector<std::vector<Expression>> entries;
};

CommutatorMatrix commutator_components(const DifferentialForm& w);

enum class ClosureVerdict { ClosedSymbolic, NotClosed, Inconclusive };

struct ClosureWitness {
  MultiIndex index;
  Expression coefficient;
};

// ClosedSymbolic: every coefficient of dw simplifies to zero. NotClosed: a
// coefficient is provably nonzero at a sample point (the witness).
// Inconclusive: dw looks nonzero but stays below 1e-10 at 50 sample points, a
// known simplifier blind spot.
struct ClosureResult {
  ClosureVerdict verdict;
  std::optional<ClosureWitness> witness;
};

ClosureResult is_closed(const DifferentialForm& w);

// Dual form under the convention *(dx^I) = s(I) * sign(I ++ complement) *
// dx^complement with s(I) the product of signature entries over I and
// orientation given by chart order. The one-argument overload takes the
// signature from the chart.
DifferentialForm hodge_star(const DifferentialForm& w);
DifferentialForm hodge_star(const DifferentialForm& w, const std::vector<int>& signature);

// Numeric value of the Poincare-homotopy potential at one point: a (p-1)-form
// given componentwise. degree-1 inputs produce the single scalar component.
struct PotentialValue {
  int degree = 0;
  std::map<MultiIndex, double> components;

  double scalar() const;
};

PotentialValue homotopy_potential(const DifferentialForm& w, std::span<const double> base,
                                  std::span<const double> at);

}  // namespace sform
