#include "sform/forms.hpp"

#include "sform/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>

namespace sform {

namespace {

// Insertion sort that tracks the permutation sign; returns false when a
// position repeats (the wedge of a covector with itself).
bool canonicalize_index(MultiIndex& index, int& sign) {
  sign = 1;
  for (std::size_t i = 1; i < index.size(); ++i) {
    int value = index[i];
    std::size_t j = i;
    while (j > 0 && index[j - 1] > value) {
      index[j] = index[j - 1];
      --j;
      sign = -sign;
    }
    index[j] = value;
  }
  for (std::size_t i = 1; i < index.size(); ++i) {
    if (index[i] == index[i - 1]) return false;
  }
  return true;
}

}  // namespace

CoordinateChart CoordinateChart::make(std::vector<std::string> names,
                                      std::optional<std::vector<int>> signature) {
  if (names.empty() || names.size() > 8) {
    throw UnsupportedDimensionError("chart dimension must be between 1 and 8");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw Error("chart coordinate names must be nonempty");
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (names[i] == names[j]) {
        throw Error("chart coordinate '" + names[i] + "' appears twice");
      }
    }
  }
  if (signature) {
    if (signature->size() != names.size()) {
      throw Error("metric signature length does not match chart dimension");
    }
    for (int s : *signature) {
      if (s != 1 && s != -1) throw Error("metric signature entries must be +1 or -1");
    }
  }
  return CoordinateChart{std::move(names), std::move(signature)};
}

int CoordinateChart::position(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw Error("unknown coordinate '" + name + "'");
}

DifferentialForm::DifferentialForm(CoordinateChart chart, int degree, bool degree_clamped)
    : chart_(std::move(chart)), degree_(degree), degree_clamped_(degree_clamped) {
  if (degree_ < 0 || degree_ > static_cast<int>(chart_.dimension())) {
    throw WrongDegreeError("form degree must lie between 0 and the chart dimension");
  }
}

void DifferentialForm::add_term(MultiIndex index, Expression coeff) {
  if (static_cast<int>(index.size()) != degree_) {
    throw WrongDegreeError("multi-index length does not match form degree");
  }
  for (int pos : index) {
    if (pos < 0 || pos >= static_cast<int>(chart_.dimension())) {
      throw Error("multi-index position outside chart");
    }
  }
  int sign = 1;
  if (!canonicalize_index(index, sign)) {
    throw Error("multi-index repeats a coordinate");
  }
  Expression incoming = sign < 0 ? Expression::negate(std::move(coeff)) : std::move(coeff);
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    Expression c = simplify(std::move(incoming));
    if (!c.is_zero()) terms_.emplace(std::move(index), std::move(c));
    return;
  }
  Expression merged = simplify(it->second + incoming);
  if (merged.is_zero()) {
    terms_.erase(it);
  } else {
    it->second = std::move(merged);
  }
}

Expression DifferentialForm::coefficient(MultiIndex index) const {
  if (static_cast<int>(index.size()) != degree_) {
    throw WrongDegreeError("multi-index length does not match form degree");
  }
  int sign = 1;
  if (!canonicalize_index(index, sign)) return Expression::integer(0);
  auto it = terms_.find(index);
  if (it == terms_.end()) return Expression::integer(0);
  return sign < 0 ? simplify(Expression::negate(it->second)) : it->second;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (!(a.chart() == b.chart())) {
    throw ChartMismatchError("wedge operands live on different charts");
  }
  int degree = a.degree() + b.degree();
  if (degree > static_cast<int>(a.chart().dimension())) {
    throw DegreeOverflowError("wedge degree exceeds chart dimension");
  }
  DifferentialForm out(a.chart(), degree);
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      MultiIndex merged;
      merged.reserve(ia.size() + ib.size());
      merged.insert(merged.end(), ia.begin(), ia.end());
      merged.insert(merged.end(), ib.begin(), ib.end());
      int sign = 1;
      if (!canonicalize_index(merged, sign)) continue;
      Expression c = Expression::product({ca, cb});
      if (sign < 0) c = Expression::negate(std::move(c));
      out.add_term(std::move(merged), std::move(c));
    }
  }
  return out;
}

DifferentialForm exterior_derivative(const DifferentialForm& w) {
  int n = static_cast<int>(w.chart().dimension());
  if (w.degree() == n) {
    return DifferentialForm(w.chart(), n, /*degree_clamped=*/true);
  }
  DifferentialForm out(w.chart(), w.degree() + 1);
  for (const auto& [index, coeff] : w.terms()) {
    for (int k = 0; k < n; ++k) {
      if (std::binary_search(index.begin(), index.end(), k)) continue;
      Expression dk = differentiate(coeff, w.chart().names[k]);
      if (dk.is_zero()) continue;
      MultiIndex extended;
      extended.reserve(index.size() + 1);
      extended.push_back(k);
      extended.insert(extended.end(), index.begin(), index.end());
      out.add_term(std::move(extended), std::move(dk));
    }
  }
  return out;
}

CommutatorMatrix commutator_components(const DifferentialForm& w) {
  if (w.degree() != 1) {
    throw WrongDegreeError("commutator components are defined for degree-1 forms");
  }
  int n = static_cast<int>(w.chart().dimension());
  std::vector<Expression> a;
  a.reserve(n);
  for (int i = 0; i < n; ++i) a.push_back(w.coefficient({i}));

  CommutatorMatrix out{w.chart(), {}};
  out.entries.assign(n, std::vector<Expression>(n, Expression::integer(0)));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Expression k = simplify(differentiate(a[j], w.chart().names[i]) -
                              differentiate(a[i], w.chart().names[j]));
      out.entries[j][i] = simplify(Expression::negate(k));
      out.entries[i][j] = std::move(k);
    }
  }
  return out;
}

ClosureResult is_closed(const DifferentialForm& w) {
  DifferentialForm dw = exterior_derivative(w);
  if (dw.is_zero()) return {ClosureVerdict::ClosedSymbolic, std::nullopt};

  // A surviving coefficient may still be a zero the simplifier cannot see
  // (it never expands products or applies function identities), so probe
  // numerically before declaring the form not closed.
  std::mt19937_64 rng(0x51A9E5D1ULL);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);
  for (const auto& [index, coeff] : dw.terms()) {
    std::set<std::string> vars = free_variables(coeff);
    for (int sample = 0; sample < 50; ++sample) {
      VariableBinding binding;
      for (const std::string& name : vars) binding[name] = draw(rng);
      double value = 0.0;
      try {
        value = evaluate(coeff, binding);
      } catch (const DomainError&) {
        continue;
      }
      if (std::abs(value) > 1e-10) {
        return {ClosureVerdict::NotClosed, ClosureWitness{index, coeff}};
      }
    }
  }
  return {ClosureVerdict::Inconclusive, std::nullopt};
}

DifferentialForm hodge_star(const DifferentialForm& w, const std::vector<int>& signature) {
  int n = static_cast<int>(w.chart().dimension());
  if (static_cast<int>(signature.size()) != n) {
    throw NoMetricError("metric signature length does not match chart dimension");
  }
  for (int s : signature) {
    if (s != 1 && s != -1) throw NoMetricError("metric signature entries must be +1 or -1");
  }
  DifferentialForm out(w.chart(), n - w.degree());
  for (const auto& [index, coeff] : w.terms()) {
    MultiIndex complement;
    complement.reserve(n - index.size());
    for (int k = 0; k < n; ++k) {
      if (!std::binary_search(index.begin(), index.end(), k)) complement.push_back(k);
    }
    // Both halves are increasing, so inversions of index ++ complement are
    // exactly the pairs (i, j) with i in index, j in complement, i > j.
    int inversions = 0;
    for (int i : index) {
      for (int j : complement) {
        if (i > j) ++inversions;
      }
    }
    int factor = inversions % 2 == 0 ? 1 : -1;
    for (int i : index) factor *= signature[i];
    out.add_term(std::move(complement),
                 Expression::product({Expression::integer(factor), coeff}));
  }
  return out;
}

DifferentialForm hodge_star(const DifferentialForm& w) {
  if (!w.chart().signature) {
    throw NoMetricError("chart carries no metric signature");
  }
  return hodge_star(w, *w.chart().signature);
}

namespace {

template <class F>
double simpson_recurse(const F& f, double a, double m, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= 30) {
    throw QuadratureFailureError("adaptive quadrature did not converge within depth 30");
  }
  return simpson_recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  double m = 0.5 * (a + b);
  double fa = f(a);
  double fm = f(m);
  double fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, m, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace

double PotentialValue::scalar() const {
  if (degree != 0) throw WrongDegreeError("potential value is not a scalar");
  auto it = components.find(MultiIndex{});
  return it == components.end() ? 0.0 : it->second;
}

PotentialValue homotopy_potential(const DifferentialForm& w, std::span<const double> base,
                                  std::span<const double> at) {
  int p = w.degree();
  std::size_t n = w.chart().dimension();
  if (p < 1) throw WrongDegreeError("potential requires a form of degree at least 1");
  if (base.size() != n || at.size() != n) {
    throw Error("potential endpoints must match the chart dimension");
  }
  if (is_closed(w).verdict != ClosureVerdict::ClosedSymbolic) {
    throw NotClosedError("homotopy potential requires a symbolically closed form");
  }

  PotentialValue out;
  out.degree = p - 1;

  std::vector<double> point(n);
  for (const auto& [index, coeff] : w.terms()) {
    CompiledExpression compiled(coeff, w.chart().names);
    // Coefficient pulled back along the straight segment base + t*(at - base),
    // weighted t^(p-1) by the homotopy operator.
    auto integrand = [&](double t) {
      for (std::size_t i = 0; i < n; ++i) point[i] = base[i] + t * (at[i] - base[i]);
      double weight = 1.0;
      for (int e = 0; e < p - 1; ++e) weight *= t;
      return weight * compiled(point);
    };
    double q = 0.0;
    bool integrated = false;
    for (int k = 0; k < p; ++k) {
      int ik = index[k];
      double scale = at[ik] - base[ik];
      if (scale == 0.0) continue;
      if (!integrated) {
        q = adaptive_simpson(integrand, 0.0, 1.0, 1e-8);
        integrated = true;
      }
      MultiIndex reduced;
      reduced.reserve(index.size() - 1);
      for (int j = 0; j < p; ++j) {
        if (j != k) reduced.push_back(index[j]);
      }
      out.components[std::move(reduced)] += (k % 2 == 0 ? 1.0 : -1.0) * scale * q;
    }
  }
  return out;
}

}  // namespace sform
