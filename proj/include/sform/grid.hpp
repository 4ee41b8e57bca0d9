#pragma once

#include "sform/errors.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sform {

// One axis of a uniform rectangular grid: count nodes from min to max,
// endpoints included. count >= 3 so every axis supports a full stencil.
struct GridAxis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 0;

  double spacing() const { return (max - min) / static_cast<double>(count - 1); }
  double coordinate(std::size_t i) const {
    return min + spacing() * static_cast<double>(i);
  }
};

// Node storage convention, shared by every grid type and the CSV layout: the
// FIRST axis varies fastest. Linear index of node (i_1, .., i_m) is
// i_1 + n_1*(i_2 + n_2*(i_3 + ..)), so ascending linear order enumerates
// nodes like the rows of a table whose columns sweep the first coordinate.
std::size_t grid_node_count(const std::vector<GridAxis>& axes);
std::size_t grid_node_index(const std::vector<GridAxis>& axes,
                            std::span<const std::size_t> idx);
std::vector<std::size_t> grid_node_tuple(const std::vector<GridAxis>& axes,
                                         std::size_t linear);

// Sampled coefficient field: one array per axis (component A_mu pairs with
// axes[mu]) plus an optional scalar sample psi, all of length node_count.
struct GridField {
  std::vector<GridAxis> axes;
  std::vector<std::vector<double>> components;
  std::optional<std::vector<double>> psi;

  // Validates axis shape (count >= 3, max > min, distinct nonempty names)
  // and array lengths. Throws GridTooSmallError or InvalidProblemError.
  static GridField make(std::vector<GridAxis> axes,
                        std::vector<std::vector<double>> components,
                        std::optional<std::vector<double>> psi = std::nullopt);

  std::size_t dimension() const { return axes.size(); }
  std::size_t node_count() const { return grid_node_count(axes); }
};

// A single scalar sampled on a grid, e.g. a determinant field.
struct ScalarGrid {
  std::vector<GridAxis> axes;
  std::vector<double> values;

  static ScalarGrid make(std::vector<GridAxis> axes, std::vector<double> values);
};

// Derivative of one sampled scalar along one axis: second-order central
// differences at interior nodes, second-order one-sided stencils at the two
// axis boundaries. Both stencils are exact on polynomials of degree <= 2.
std::vector<double> derivative_axis(std::span<const double> values,
                                    const std::vector<GridAxis>& axes,
                                    std::size_t axis);

// K_ab = D_a A_b - D_b A_a for a < b, on the same grid as the input. This is
// the flat-chart commutator: no metric contribution is included.
struct CommutatorEntry {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::vector<double> values;
};

struct CommutatorField {
  std::vector<GridAxis> axes;
  std::vector<CommutatorEntry> entries;
};

CommutatorField discrete_commutator(const GridField& f);

// Norms of one sampled scalar. linf is the max of |v| over the scanned nodes;
// l2 is sqrt(h_1*..*h_m * sum of trapezoid-weighted v^2), the trapezoid rule
// for the integral of v^2 over the scanned box. The argmax reports the first
// attaining node in storage order (smallest linear index).
struct NormSummary {
  double linf = 0.0;
  double l2 = 0.0;
  std::vector<std::size_t> argmax_index;
  std::vector<double> argmax_point;
};

NormSummary grid_norms(std::span<const double> values,
                       const std::vector<GridAxis>& axes, bool interior_only);

struct PairNorm {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  NormSummary norm;
};

struct ComponentNorm {
  std::size_t component = 0;
  NormSummary norm;
};

// interior_only drops the outermost node layer so one-sided boundary
// truncation error cannot dominate the verdict.
std::vector<PairNorm> nonidentity_norm(const CommutatorField& k,
                                       bool interior_only = false);

// R_mu = D_mu psi - A_mu with the same stencils as the commutator. Throws
// MissingPsiError when the field has no psi array.
struct ResidualField {
  std::vector<GridAxis> axes;
  std::vector<std::vector<double>> components;
};

ResidualField evolutionary_residual(const GridField& f);

enum class Verdict { Identical, Nonidentical };

// Cell of the grid, identified by its lowest-corner node index.
struct GridCell {
  std::vector<std::size_t> corner;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct NonidentityReport {
  std::vector<PairNorm> commutator;
  std::vector<ComponentNorm> residual;  // one per component when psi is present
  double tol = 1e-6;
  bool interior_only = false;
  Verdict verdict = Verdict::Nonidentical;
  std::vector<GridCell> degeneracy;  // filled when a determinant field accompanies the run
};

// Identical exactly when every reported L-infinity norm (commutator entries,
// and residual components when psi is present) is <= tol.
NonidentityReport exactness_verdict(const GridField& f, double tol = 1e-6,
                                    bool interior_only = false);

// Cells where the sampled determinant crosses zero: any cell containing an
// edge with a strict sign change, plus the cell at each node with |det| <=
// tol (clamped inward for nodes on a top boundary). Sorted by corner index.
std::vector<GridCell> degeneracy_locus(const ScalarGrid& det, double tol);

}  // namespace sform
