#include "sform/grid.hpp"

#include "sform/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace sform {

namespace {

void validate_axes(const std::vector<GridAxis>& axes) {
  if (axes.empty()) throw InvalidProblemError("grid needs at least one axis");
  std::set<std::string> seen;
  std::size_t total = 1;
  for (const GridAxis& axis : axes) {
    if (axis.name.empty()) throw InvalidProblemError("axis name must be nonempty");
    if (!seen.insert(axis.name).second) {
      throw InvalidProblemError("duplicate axis name '" + axis.name + "'");
    }
    if (axis.count < 3) {
      throw GridTooSmallError("axis '" + axis.name + "' has " + std::to_string(axis.count) +
                              " nodes, stencils need at least 3");
    }
    if (!std::isfinite(axis.min) || !std::isfinite(axis.max) || !(axis.max > axis.min)) {
      throw InvalidProblemError("axis '" + axis.name + "' needs finite max > min");
    }
    if (total > std::numeric_limits<std::size_t>::max() / axis.count) {
      throw InvalidProblemError("grid node count overflows");
    }
    total *= axis.count;
  }
}

void validate_array(const std::vector<double>& values, std::size_t nodes, const std::string& what) {
  if (values.size() != nodes) {
    throw InvalidProblemError(what + " has " + std::to_string(values.size()) +
                              " values, grid has " + std::to_string(nodes) + " nodes");
  }
}

// Stride of `axis` in the linear layout (first axis fastest).
std::size_t axis_stride(const std::vector<GridAxis>& axes, std::size_t axis) {
  std::size_t s = 1;
  for (std::size_t a = 0; a < axis; ++a) s *= axes[a].count;
  return s;
}

// Storage-order comparison of index tuples: last axis is most significant.
bool storage_less(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
  return std::lexicographical_compare(x.rbegin(), x.rend(), y.rbegin(), y.rend());
}

}  // namespace

std::size_t grid_node_count(const std::vector<GridAxis>& axes) {
  std::size_t total = 1;
  for (const GridAxis& axis : axes) total *= axis.count;
  return total;
}

std::size_t grid_node_index(const std::vector<GridAxis>& axes, std::span<const std::size_t> idx) {
  std::size_t lin = 0;
  for (std::size_t a = axes.size(); a-- > 0;) lin = lin * axes[a].count + idx[a];
  return lin;
}

std::vector<std::size_t> grid_node_tuple(const std::vector<GridAxis>& axes, std::size_t linear) {
  std::vector<std::size_t> idx(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    idx[a] = linear % axes[a].count;
    linear /= axes[a].count;
  }
  return idx;
}

GridField GridField::make(std::vector<GridAxis> axes, std::vector<std::vector<double>> components,
                          std::optional<std::vector<double>> psi) {
  validate_axes(axes);
  const std::size_t nodes = grid_node_count(axes);
  if (components.size() != axes.size()) {
    throw InvalidProblemError("expected one component array per axis, got " +
                              std::to_string(components.size()) + " for " +
                              std::to_string(axes.size()) + " axes");
  }
  for (std::size_t mu = 0; mu < components.size(); ++mu) {
    validate_array(components[mu], nodes, "component " + std::to_string(mu + 1));
  }
  if (psi) validate_array(*psi, nodes, "psi");
  return GridField{std::move(axes), std::move(components), std::move(psi)};
}

ScalarGrid ScalarGrid::make(std::vector<GridAxis> axes, std::vector<double> values) {
  validate_axes(axes);
  validate_array(values, grid_node_count(axes), "scalar field");
  return ScalarGrid{std::move(axes), std::move(values)};
}

std::vector<double> derivative_axis(std::span<const double> values,
                                    const std::vector<GridAxis>& axes, std::size_t axis) {
  validate_axes(axes);
  if (axis >= axes.size()) throw InvalidProblemError("derivative axis out of range");
  const std::size_t total = grid_node_count(axes);
  if (values.size() != total) {
    throw InvalidProblemError("field has " + std::to_string(values.size()) +
                              " values, grid has " + std::to_string(total) + " nodes");
  }

  // Nodes sharing every index except i_axis sit `block` apart, and the slabs
  // with consecutive i_axis are themselves contiguous. Each plane therefore
  // needs three kernel calls: two one-sided boundary slabs and one central
  // band covering i_axis = 1 .. n-2 in a single run.
  const std::size_t block = axis_stride(axes, axis);
  const std::size_t n = axes[axis].count;
  const std::size_t plane = block * n;
  const double inv2h = 1.0 / (2.0 * axes[axis].spacing());

  std::vector<double> out(total);
  for (std::size_t base = 0; base < total; base += plane) {
    const double* src = values.data() + base;
    double* dst = out.data() + base;
    kernels::triad(dst, src, src + block, src + 2 * block, -3.0 * inv2h, 4.0 * inv2h, -inv2h,
                   block);
    const double* top = src + (n - 1) * block;
    kernels::triad(dst + (n - 1) * block, top, top - block, top - 2 * block, 3.0 * inv2h,
                   -4.0 * inv2h, inv2h, block);
    kernels::diff_scaled(dst + block, src + 2 * block, src, inv2h, (n - 2) * block);
  }
  return out;
}

CommutatorField discrete_commutator(const GridField& f) {
  if (f.dimension() < 2) {
    throw GridTooSmallError("commutator needs at least two axes, grid has " +
                            std::to_string(f.dimension()));
  }
  const std::size_t total = f.node_count();
  CommutatorField k{f.axes, {}};
  for (std::size_t alpha = 0; alpha < f.dimension(); ++alpha) {
    for (std::size_t beta = alpha + 1; beta < f.dimension(); ++beta) {
      std::vector<double> dab = derivative_axis(f.components[beta], f.axes, alpha);
      const std::vector<double> dba = derivative_axis(f.components[alpha], f.axes, beta);
      kernels::subtract(dab.data(), dab.data(), dba.data(), total);
      k.entries.push_back(CommutatorEntry{alpha, beta, std::move(dab)});
    }
  }
  return k;
}

NormSummary grid_norms(std::span<const double> values, const std::vector<GridAxis>& axes,
                       bool interior_only) {
  validate_axes(axes);
  const std::size_t total = grid_node_count(axes);
  if (values.size() != total) {
    throw InvalidProblemError("field has " + std::to_string(values.size()) +
                              " values, grid has " + std::to_string(total) + " nodes");
  }
  const std::size_t m = axes.size();
  std::vector<std::size_t> lo(m, 0), hi(m);
  for (std::size_t a = 0; a < m; ++a) {
    hi[a] = axes[a].count - 1;
    if (interior_only) {
      lo[a] = 1;
      hi[a] = axes[a].count - 2;
    }
  }

  // Trapezoid weights for the integral of v^2 over the scanned box: 1/2 on
  // the box faces, 1 inside, 0 outside; an axis whose box is a single node
  // keeps weight 1. The weighted sum then integrates constants exactly.
  std::vector<double> weights(total, 0.0);
  double linf = 0.0;
  {
    std::vector<std::size_t> t(m, 0);
    for (std::size_t i = 0; i < total; ++i) {
      bool inside = true;
      double w = 1.0;
      for (std::size_t a = 0; a < m; ++a) {
        if (t[a] < lo[a] || t[a] > hi[a]) {
          inside = false;
          break;
        }
        if (lo[a] < hi[a] && (t[a] == lo[a] || t[a] == hi[a])) w *= 0.5;
      }
      if (inside) weights[i] = w;
      for (std::size_t a = 0; a < m; ++a) {
        if (++t[a] < axes[a].count) break;
        t[a] = 0;
      }
    }
  }

  if (!interior_only) {
    linf = kernels::max_abs(values.data(), total);
  } else {
    // The box restricted to the first axis is a contiguous run per tuple of
    // the remaining indices; take the max run by run.
    const std::size_t run = hi[0] - lo[0] + 1;
    std::vector<std::size_t> t(lo.begin() + 1, lo.end());
    for (;;) {
      std::size_t base = 0;
      for (std::size_t a = m; a-- > 1;) base = base * axes[a].count + t[a - 1];
      base = base * axes[0].count + lo[0];
      linf = std::max(linf, kernels::max_abs(values.data() + base, run));
      std::size_t a = 1;
      for (; a < m; ++a) {
        if (++t[a - 1] <= hi[a]) break;
        t[a - 1] = lo[a];
      }
      if (a == m) break;
    }
  }

  double prod_h = 1.0;
  for (const GridAxis& axis : axes) prod_h *= axis.spacing();

  NormSummary out;
  out.linf = linf;
  out.l2 = std::sqrt(prod_h * kernels::weighted_sumsq(values.data(), weights.data(), total));

  // First node attaining the max, in storage order (smallest linear index).
  std::vector<std::size_t> t(m, 0);
  for (std::size_t i = 0; i < total; ++i) {
    bool inside = true;
    for (std::size_t a = 0; a < m; ++a) {
      if (t[a] < lo[a] || t[a] > hi[a]) {
        inside = false;
        break;
      }
    }
    if (inside && std::abs(values[i]) == linf) {
      out.argmax_index = t;
      out.argmax_point.resize(m);
      for (std::size_t a = 0; a < m; ++a) out.argmax_point[a] = axes[a].coordinate(t[a]);
      break;
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (++t[a] < axes[a].count) break;
      t[a] = 0;
    }
  }
  return out;
}

std::vector<PairNorm> nonidentity_norm(const CommutatorField& k, bool interior_only) {
  std::vector<PairNorm> out;
  out.reserve(k.entries.size());
  for (const CommutatorEntry& e : k.entries) {
    out.push_back(PairNorm{e.alpha, e.beta, grid_norms(e.values, k.axes, interior_only)});
  }
  return out;
}

ResidualField evolutionary_residual(const GridField& f) {
  if (!f.psi) throw MissingPsiError("grid carries no psi array");
  const std::size_t total = f.node_count();
  ResidualField r{f.axes, {}};
  r.components.reserve(f.dimension());
  for (std::size_t mu = 0; mu < f.dimension(); ++mu) {
    std::vector<double> d = derivative_axis(*f.psi, f.axes, mu);
    kernels::subtract(d.data(), d.data(), f.components[mu].data(), total);
    r.components.push_back(std::move(d));
  }
  return r;
}

NonidentityReport exactness_verdict(const GridField& f, double tol, bool interior_only) {
  if (!(tol > 0.0)) throw InvalidProblemError("verdict tolerance must be positive");
  NonidentityReport rep;
  rep.tol = tol;
  rep.interior_only = interior_only;
  if (f.dimension() >= 2) {
    rep.commutator = nonidentity_norm(discrete_commutator(f), interior_only);
  }
  if (f.psi) {
    const ResidualField r = evolutionary_residual(f);
    for (std::size_t mu = 0; mu < r.components.size(); ++mu) {
      rep.residual.push_back(ComponentNorm{mu, grid_norms(r.components[mu], f.axes, interior_only)});
    }
  }
  bool identical = true;
  for (const PairNorm& p : rep.commutator) identical = identical && p.norm.linf <= tol;
  for (const ComponentNorm& c : rep.residual) identical = identical && c.norm.linf <= tol;
  rep.verdict = identical ? Verdict::Identical : Verdict::Nonidentical;
  return rep;
}

std::vector<GridCell> degeneracy_locus(const ScalarGrid& det, double tol) {
  validate_axes(det.axes);
  const std::size_t total = grid_node_count(det.axes);
  if (det.values.size() != total) {
    throw InvalidProblemError("determinant field has " + std::to_string(det.values.size()) +
                              " values, grid has " + std::to_string(total) + " nodes");
  }
  const std::size_t m = det.axes.size();
  std::set<std::vector<std::size_t>, decltype(&storage_less)> cells(&storage_less);

  // Threshold pass: a node with |det| <= tol marks the cell it is the lowest
  // corner of, clamped inward when the node sits on a top boundary.
  std::vector<std::size_t> t(m, 0);
  for (std::size_t i = 0; i < total; ++i) {
    if (std::abs(det.values[i]) <= tol) {
      std::vector<std::size_t> corner(m);
      for (std::size_t a = 0; a < m; ++a) corner[a] = std::min(t[a], det.axes[a].count - 2);
      cells.insert(std::move(corner));
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (++t[a] < det.axes[a].count) break;
      t[a] = 0;
    }
  }

  // Sign-change pass: a strict flip across an edge along axis `a` marks every
  // cell containing that edge (the edge is shared by up to 2^(m-1) cells).
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t stride = axis_stride(det.axes, a);
    std::fill(t.begin(), t.end(), 0);
    for (std::size_t i = 0; i < total; ++i) {
      if (t[a] + 1 < det.axes[a].count && det.values[i] * det.values[i + stride] < 0.0) {
        std::vector<std::size_t> corner(m);
        corner[a] = t[a];
        // Odometer over the transverse corner choices t[b]-1 and t[b].
        std::vector<int> pick(m, 0);
        for (;;) {
          bool valid = true;
          for (std::size_t b = 0; b < m && valid; ++b) {
            if (b == a) continue;
            const std::size_t off = static_cast<std::size_t>(pick[b]);
            if (t[b] + off < 1 || t[b] + off - 1 > det.axes[b].count - 2) {
              valid = false;
            } else {
              corner[b] = t[b] + off - 1;
            }
          }
          if (valid) cells.insert(corner);
          std::size_t b = 0;
          for (; b < m; ++b) {
            if (b == a) continue;
            if (++pick[b] <= 1) break;
            pick[b] = 0;
          }
          if (b == m) break;
        }
      }
      for (std::size_t b = 0; b < m; ++b) {
        if (++t[b] < det.axes[b].count) break;
        t[b] = 0;
      }
    }
  }

  std::vector<GridCell> out;
  out.reserve(cells.size());
  for (const std::vector<std::size_t>& c : cells) out.push_back(GridCell{c});
  return out;
}

}  // namespace sform
