// Batch front door: reads problem/form/grid files, runs the analysis
// pipelines, emits reports and trajectory files with stable formats and exit
// codes (0 success, 1 input or usage error, 2 numerical failure). Verdicts
// like NotClosed or Nonidentical are report content, not failures.

#include "CLI11.hpp"
#include "json.hpp"

#include "sform/charpit.hpp"
#include "sform/formats.hpp"
#include "sform/forms.hpp"
#include "sform/grid.hpp"
#include "sform/parse.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using nlohmann::ordered_json;
using namespace sform;

namespace {

constexpr const char* kTool = "sform 0.1.0";

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NewtonDivergenceError*>(&e) ||
      dynamic_cast<const OverdeterminedStripError*>(&e) ||
      dynamic_cast<const EvaluationError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const QuadratureFailureError*>(&e) ||
      dynamic_cast<const ExpressionOverflowError*>(&e)) {
    return 2;
  }
  return 1;
}

std::string basis_string(const CoordinateChart& chart, const MultiIndex& index) {
  if (index.empty()) return "1";
  std::string s;
  for (int pos : index) {
    if (!s.empty()) s += '^';
    s += 'd';
    s += chart.names[static_cast<std::size_t>(pos)];
  }
  return s;
}

std::string joined_names(const std::vector<std::string>& names) {
  std::string s;
  for (const std::string& n : names) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(0, "cannot write '" + path + "'");
  return out;
}

void write_json_report(const std::string& path, const ordered_json& report) {
  std::ofstream out = open_output(path);
  out << report.dump(2) << '\n';
}

ordered_json report_header(const char* subcommand, const std::string& input) {
  ordered_json j;
  j["tool"] = kTool;
  j["subcommand"] = subcommand;
  j["input"] = {{"path", input}, {"digest", digest_file(input)}};
  return j;
}

std::vector<double> parse_point(const std::string& text, std::size_t dim, const char* what) {
  std::vector<double> point;
  for (const std::string& item : [&] {
         std::vector<std::string> parts;
         std::size_t start = 0;
         for (std::size_t i = 0; i <= text.size(); ++i) {
           if (i == text.size() || text[i] == ',') {
             parts.push_back(text.substr(start, i - start));
             start = i + 1;
           }
         }
         return parts;
       }()) {
    try {
      std::size_t used = 0;
      point.push_back(std::stod(item, &used));
      if (used != item.size() && !item.substr(used).empty() &&
          item.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw InvalidProblemError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (point.size() != dim) {
    throw InvalidProblemError(std::string(what) + " needs " + std::to_string(dim) +
                              " coordinates, got " + std::to_string(point.size()));
  }
  return point;
}

// ---------------------------------------------------------------- closure --

struct ClosureOptions {
  std::string input;
  std::string out;
  std::string format = "json";
};

void run_closure(const ClosureOptions& opt) {
  const DifferentialForm form = read_form_file(opt.input);
  const CoordinateChart& chart = form.chart();
  const DifferentialForm dw = exterior_derivative(form);
  const ClosureResult closure = is_closed(form);

  std::cout << "form: degree " << form.degree() << " over (" << joined_names(chart.names)
            << "), " << form.terms().size() << (form.terms().size() == 1 ? " term" : " terms")
            << '\n';
  std::cout << "d: degree " << dw.degree() << ", " << dw.terms().size()
            << (dw.terms().size() == 1 ? " term" : " terms") << '\n';
  for (const auto& [index, coeff] : dw.terms()) {
    std::cout << "  " << basis_string(chart, index) << ": " << to_string(coeff) << '\n';
  }

  std::optional<CommutatorMatrix> commutator;
  if (form.degree() == 1) {
    commutator = commutator_components(form);
    std::cout << "commutator:\n";
    for (std::size_t i = 0; i < chart.dimension(); ++i) {
      for (std::size_t j = i + 1; j < chart.dimension(); ++j) {
        std::cout << "  K[" << i + 1 << "][" << j + 1
                  << "] = " << to_string(commutator->entries[i][j]) << '\n';
      }
    }
  }

  std::cout << "verdict: " << to_string(closure.verdict) << '\n';
  if (closure.witness) {
    std::cout << "witness: " << basis_string(chart, closure.witness->index) << " = "
              << to_string(closure.witness->coefficient) << '\n';
  }
  if (closure.verdict == ClosureVerdict::ClosedSymbolic) {
    std::cout << "potential: available through the 'potential' subcommand\n";
  }

  if (opt.out.empty()) return;
  if (opt.format == "csv") {
    std::ofstream out = open_output(opt.out);
    out << "# tool = " << kTool << "\n# subcommand = closure\n# input = " << opt.input
        << "\n# digest = " << digest_file(opt.input) << "\n# verdict = "
        << to_string(closure.verdict) << "\nbasis,coefficient\n";
    for (const auto& [index, coeff] : dw.terms()) {
      out << basis_string(chart, index) << ",\"" << to_string(coeff) << "\"\n";
    }
  } else {
    ordered_json j = report_header("closure", opt.input);
    j["degree"] = form.degree();
    j["coordinates"] = chart.names;
    ordered_json terms = ordered_json::array();
    for (const auto& [index, coeff] : dw.terms()) {
      terms.push_back({{"basis", basis_string(chart, index)}, {"coefficient", to_string(coeff)}});
    }
    j["d"] = {{"degree", dw.degree()}, {"terms", terms}};
    if (commutator) {
      ordered_json k = ordered_json::array();
      for (std::size_t i = 0; i < chart.dimension(); ++i) {
        for (std::size_t jj = i + 1; jj < chart.dimension(); ++jj) {
          k.push_back({{"i", i + 1},
                       {"j", jj + 1},
                       {"entry", to_string(commutator->entries[i][jj])}});
        }
      }
      j["commutator"] = k;
    }
    j["verdict"] = to_string(closure.verdict);
    if (closure.witness) {
      j["witness"] = {{"basis", basis_string(chart, closure.witness->index)},
                      {"coefficient", to_string(closure.witness->coefficient)}};
    }
    j["manifest"] = {opt.out};
    write_json_report(opt.out, j);
  }
  std::cout << "wrote " << opt.out << '\n';
}

// -------------------------------------------------------- characteristics --

struct CharacteristicsOptions {
  std::string input;
  double step = 1e-2;
  double span = 1.0;
  std::optional<std::size_t> samples;
  std::string out = "out";
  bool split = false;
  std::string format = "json";
};

void run_characteristics(const CharacteristicsOptions& opt) {
  if (!(opt.step > 0.0) || !std::isfinite(opt.step)) {
    throw InvalidProblemError("step must be positive and finite");
  }
  if (!(opt.span > 0.0) || !std::isfinite(opt.span)) {
    throw InvalidProblemError("span must be positive and finite");
  }

  ProblemFile pf = read_problem_file(opt.input);
  if (opt.samples) pf.strip.sample_count = *opt.samples;
  const InitialStrip strip = complete_initial_strip(pf.problem, pf.strip);
  const std::vector<CharacteristicTrajectory> trajectories =
      integrate_characteristics(pf.problem, strip, opt.span, opt.step);

  double max_residual = 0.0;
  std::map<Termination, std::size_t> terminations;
  for (const CharacteristicTrajectory& t : trajectories) {
    max_residual = std::max(max_residual, conservation_check(t));
    ++terminations[t.termination];
  }

  std::optional<DegeneracyReport> degeneracy;
  if (pf.problem.dimension() == 2 && trajectories.size() >= 2) {
    degeneracy = detect_degeneracy(trajectories);
  }

  std::vector<std::string> manifest;
  if (opt.split) {
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      char tag[16];
      std::snprintf(tag, sizeof(tag), "%04zu", k);
      const std::string path = opt.out + "_" + tag + ".csv";
      std::ofstream out = open_output(path);
      write_trajectory_csv(out, trajectories[k]);
      manifest.push_back(path);
    }
  } else {
    const std::string path = opt.out + ".csv";
    std::ofstream out = open_output(path);
    write_trajectories_csv(out, trajectories);
    manifest.push_back(path);
  }

  if (opt.format == "json") {
    const std::string path = opt.out + ".json";
    manifest.push_back(path);
    ordered_json j = report_header("characteristics", opt.input);
    j["equation"] = to_string(pf.problem.equation);
    j["coordinates"] = pf.problem.coordinates;
    j["parameters"] = {{"step", opt.step},
                       {"span", opt.span},
                       {"samples", strip.samples.size()}};
    j["strip"] = {{"param", strip.param},
                  {"range", {strip.range_begin, strip.range_end}}};
    j["terminations"] = {{"span_end", terminations[Termination::SpanEnd]},
                         {"blowup", terminations[Termination::Blowup]},
                         {"domain_exit", terminations[Termination::DomainExit]}};
    j["conservation"] = {{"max_residual", max_residual}};
    if (degeneracy) {
      ordered_json d;
      d["computed"] = true;
      if (degeneracy->crossing_s) {
        d["crossing_s"] = *degeneracy->crossing_s;
      } else {
        d["crossing_s"] = nullptr;
      }
      ordered_json cells = ordered_json::array();
      for (const DegeneracyCell& c : degeneracy->sign_changes) {
        cells.push_back({{"r", c.r}, {"s", c.s}});
      }
      d["sign_changes"] = cells;
      j["degeneracy"] = d;
    } else {
      j["degeneracy"] = {{"computed", false}};
    }
    j["manifest"] = manifest;
    write_json_report(path, j);
  }

  std::cout << "problem: F = " << to_string(pf.problem.equation) << " over ("
            << joined_names(pf.problem.coordinates) << ")\n";
  std::cout << "strip: " << strip.samples.size() << " samples, " << strip.param << " in ["
            << format_double(strip.range_begin) << ", " << format_double(strip.range_end)
            << "]\n";
  std::cout << "integration: span " << format_double(opt.span) << ", step "
            << format_double(opt.step) << '\n';
  std::cout << "terminations: span_end " << terminations[Termination::SpanEnd] << ", blowup "
            << terminations[Termination::Blowup] << ", domain_exit "
            << terminations[Termination::DomainExit] << '\n';
  std::cout << "conservation: max |F| residual = " << format_double(max_residual) << '\n';
  if (!degeneracy) {
    std::cout << "degeneracy: not computed (needs two coordinates and at least two "
                 "trajectories)\n";
  } else if (degeneracy->crossing_s) {
    std::cout << "degeneracy: s* = " << format_double(*degeneracy->crossing_s) << " ("
              << degeneracy->sign_changes.size() << " sign changes)\n";
  } else {
    std::cout << "degeneracy: none detected\n";
  }
  for (const std::string& path : manifest) std::cout << "wrote " << path << '\n';
}

// --------------------------------------------------------------- diagnose --

struct DiagnoseOptions {
  std::string input;
  double tol = 1e-6;
  double det_tol = 0.0;
  bool interior_only = false;
  std::string det;
  std::string out;
  std::string format = "json";
};

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t v : idx) {
    if (!s.empty()) s += ';';
    s += std::to_string(v);
  }
  return s;
}

void run_diagnose(const DiagnoseOptions& opt) {
  const GridField grid = read_grid_csv(opt.input);
  NonidentityReport rep = exactness_verdict(grid, opt.tol, opt.interior_only);
  if (!opt.det.empty()) {
    rep.degeneracy = degeneracy_locus(read_scalar_csv(opt.det), opt.det_tol);
  }

  std::cout << "grid:";
  for (std::size_t a = 0; a < grid.dimension(); ++a) {
    std::cout << (a == 0 ? " " : " x ") << grid.axes[a].count;
  }
  std::cout << " nodes over (";
  std::vector<std::string> names;
  for (const GridAxis& axis : grid.axes) names.push_back(axis.name);
  std::cout << joined_names(names) << ")\n";
  std::cout << "note: flat-chart commutator (metric contribution omitted)\n";

  const auto print_norm = [&](const std::string& label, const NormSummary& n) {
    std::cout << label << ": linf = " << format_double(n.linf)
              << ", l2 = " << format_double(n.l2) << ", argmax at (";
    for (std::size_t a = 0; a < n.argmax_point.size(); ++a) {
      std::cout << (a ? ", " : "") << format_double(n.argmax_point[a]);
    }
    std::cout << ")\n";
  };
  for (const PairNorm& p : rep.commutator) {
    print_norm("K[" + std::to_string(p.alpha + 1) + "][" + std::to_string(p.beta + 1) + "]",
               p.norm);
  }
  for (const ComponentNorm& c : rep.residual) {
    print_norm("R[" + std::to_string(c.component + 1) + "]", c.norm);
  }
  std::cout << "verdict: " << to_string(rep.verdict) << " (tol " << format_double(rep.tol)
            << (rep.interior_only ? ", interior nodes only" : ", all nodes") << ")\n";
  if (!opt.det.empty()) {
    std::cout << "degeneracy: " << rep.degeneracy.size()
              << (rep.degeneracy.size() == 1 ? " cell\n" : " cells\n");
  }

  if (opt.out.empty()) return;
  if (opt.format == "csv") {
    std::ofstream out = open_output(opt.out);
    out << "# tool = " << kTool << "\n# subcommand = diagnose\n# input = " << opt.input
        << "\n# digest = " << digest_file(opt.input) << "\n# verdict = " << to_string(rep.verdict)
        << "\nkind,i,j,linf,l2,argmax\n";
    for (const PairNorm& p : rep.commutator) {
      out << "K," << p.alpha + 1 << ',' << p.beta + 1 << ',' << format_double(p.norm.linf) << ','
          << format_double(p.norm.l2) << ',' << index_list(p.norm.argmax_index) << '\n';
    }
    for (const ComponentNorm& c : rep.residual) {
      out << "R," << c.component + 1 << ",," << format_double(c.norm.linf) << ','
          << format_double(c.norm.l2) << ',' << index_list(c.norm.argmax_index) << '\n';
    }
    for (const GridCell& cell : rep.degeneracy) {
      out << "cell,,,,," << index_list(cell.corner) << '\n';
    }
  } else {
    ordered_json j = report_header("diagnose", opt.input);
    j["note"] = "flat-chart commutator";
    j["parameters"] = {{"tol", rep.tol},
                       {"interior_only", rep.interior_only},
                       {"det_tol", opt.det_tol}};
    ordered_json ks = ordered_json::array();
    for (const PairNorm& p : rep.commutator) {
      ks.push_back({{"i", p.alpha + 1},
                    {"j", p.beta + 1},
                    {"linf", p.norm.linf},
                    {"l2", p.norm.l2},
                    {"argmax_index", p.norm.argmax_index},
                    {"argmax_point", p.norm.argmax_point}});
    }
    j["commutator"] = ks;
    ordered_json rs = ordered_json::array();
    for (const ComponentNorm& c : rep.residual) {
      rs.push_back({{"component", c.component + 1},
                    {"linf", c.norm.linf},
                    {"l2", c.norm.l2},
                    {"argmax_index", c.norm.argmax_index},
                    {"argmax_point", c.norm.argmax_point}});
    }
    j["residual"] = rs;
    j["verdict"] = to_string(rep.verdict);
    if (!opt.det.empty()) {
      ordered_json cells = ordered_json::array();
      for (const GridCell& cell : rep.degeneracy) cells.push_back(cell.corner);
      j["degeneracy"] = {{"input", opt.det}, {"cells", cells}};
    }
    j["manifest"] = {opt.out};
    write_json_report(opt.out, j);
  }
  std::cout << "wrote " << opt.out << '\n';
}

// -------------------------------------------------------------- potential --

struct PotentialOptions {
  std::string input;
  std::string base;
  std::vector<std::string> at;
  std::string out;
  std::string format = "json";
};

void run_potential(const PotentialOptions& opt) {
  const DifferentialForm form = read_form_file(opt.input);
  const CoordinateChart& chart = form.chart();
  const std::size_t dim = chart.dimension();

  const ClosureResult closure = is_closed(form);
  if (closure.verdict != ClosureVerdict::ClosedSymbolic) {
    std::string message = std::string("form is ") + to_string(closure.verdict) +
                          "; the potential needs a symbolically closed form";
    if (closure.witness) {
      message += " (d has " + basis_string(chart, closure.witness->index) + " = " +
                 to_string(closure.witness->coefficient) + ")";
    }
    throw NotClosedError(message);
  }

  std::vector<double> base(dim, 0.0);
  if (!opt.base.empty()) base = parse_point(opt.base, dim, "--base");
  if (opt.at.empty()) throw InvalidProblemError("give at least one --at point");

  struct Row {
    std::vector<double> point;
    PotentialValue value;
  };
  std::vector<Row> rows;
  for (const std::string& text : opt.at) {
    Row row;
    row.point = parse_point(text, dim, "--at");
    row.value = homotopy_potential(form, base, row.point);
    rows.push_back(std::move(row));
  }

  for (const Row& row : rows) {
    std::string point_text;
    for (std::size_t a = 0; a < dim; ++a) {
      point_text += (a ? ", " : "") + format_double(row.point[a]);
    }
    if (row.value.degree == 0) {
      std::cout << "h at (" << point_text << ") = " << format_double(row.value.scalar()) << '\n';
    } else {
      for (const auto& [index, v] : row.value.components) {
        std::cout << "h at (" << point_text << ") [" << basis_string(chart, index)
                  << "] = " << format_double(v) << '\n';
      }
    }
  }

  if (opt.out.empty()) return;
  if (opt.format == "csv") {
    std::ofstream out = open_output(opt.out);
    out << "# tool = " << kTool << "\n# subcommand = potential\n# input = " << opt.input
        << "\n# digest = " << digest_file(opt.input) << '\n';
    for (const std::string& name : chart.names) out << name << ',';
    out << "component,value\n";
    for (const Row& row : rows) {
      for (const auto& [index, v] : row.value.components) {
        for (double c : row.point) out << format_double(c) << ',';
        out << basis_string(chart, index) << ',' << format_double(v) << '\n';
      }
    }
  } else {
    ordered_json j = report_header("potential", opt.input);
    j["base"] = base;
    ordered_json points = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json entry;
      entry["point"] = row.point;
      if (row.value.degree == 0) {
        entry["value"] = row.value.scalar();
      } else {
        ordered_json comps = ordered_json::array();
        for (const auto& [index, v] : row.value.components) {
          comps.push_back({{"basis", basis_string(chart, index)}, {"value", v}});
        }
        entry["components"] = comps;
      }
      points.push_back(std::move(entry));
    }
    j["points"] = points;
    j["manifest"] = {opt.out};
    write_json_report(opt.out, j);
  }
  std::cout << "wrote " << opt.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew-symmetric differential form toolkit: closure analysis, "
               "characteristic strips, and discrete exactness diagnostics"};
  app.require_subcommand(1);

  ClosureOptions closure_opt;
  CLI::App* closure_cmd = app.add_subcommand("closure", "Differentiate a form and test closure");
  closure_cmd->add_option("form", closure_opt.input, "form file")->required();
  closure_cmd->add_option("--out", closure_opt.out, "report file to write");
  closure_cmd->add_option("--format", closure_opt.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  CharacteristicsOptions chars_opt;
  CLI::App* chars_cmd =
      app.add_subcommand("characteristics", "Integrate the characteristic strips of a problem");
  chars_cmd->add_option("problem", chars_opt.input, "problem file")->required();
  chars_cmd->add_option("--step", chars_opt.step, "integration step (default 0.01)");
  chars_cmd->add_option("--span", chars_opt.span, "parameter span to integrate (default 1)");
  chars_cmd->add_option("--samples", chars_opt.samples, "override the strip sample count");
  chars_cmd->add_option("--out", chars_opt.out, "output prefix (default 'out')");
  chars_cmd->add_flag("--split", chars_opt.split, "one trajectory file per strip sample");
  chars_cmd->add_option("--format", chars_opt.format, "csv: trajectories only; json: also a report")
      ->check(CLI::IsMember({"csv", "json"}));

  DiagnoseOptions diag_opt;
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "Commutator and exactness diagnostics of a sampled field");
  diag_cmd->add_option("grid", diag_opt.input, "grid CSV file")->required();
  diag_cmd->add_option("--tol", diag_opt.tol, "verdict tolerance (default 1e-6)");
  diag_cmd->add_flag("--interior-only", diag_opt.interior_only,
                     "norms over interior nodes only");
  diag_cmd->add_option("--det", diag_opt.det, "determinant field CSV for degeneracy cells");
  diag_cmd->add_option("--det-tol", diag_opt.det_tol, "node threshold for --det (default 0)");
  diag_cmd->add_option("--out", diag_opt.out, "report file to write");
  diag_cmd->add_option("--format", diag_opt.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  PotentialOptions pot_opt;
  CLI::App* pot_cmd =
      app.add_subcommand("potential", "Evaluate the homotopy potential of a closed form");
  pot_cmd->add_option("form", pot_opt.input, "form file")->required();
  pot_cmd->add_option("--base", pot_opt.base, "base point (default origin)");
  pot_cmd->add_option("--at", pot_opt.at, "evaluation point, repeatable")->required();
  pot_cmd->add_option("--out", pot_opt.out, "report file to write");
  pot_cmd->add_option("--format", pot_opt.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (closure_cmd->parsed()) {
      run_closure(closure_opt);
    } else if (chars_cmd->parsed()) {
      run_characteristics(chars_opt);
    } else if (diag_cmd->parsed()) {
      run_diagnose(diag_opt);
    } else if (pot_cmd->parsed()) {
      run_potential(pot_opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
