#include "sform/formats.hpp"

#include "sform/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace sform {

namespace {

struct Line {
  std::size_t number = 0;
  std::string text;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Reads the file with 1-based line numbers, stripping '#' comments and blank
// lines. Quoted strings in these formats never contain '#'.
std::vector<Line> read_content_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(0, "cannot open '" + path + "'");
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (const std::size_t hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string_view body = trim(raw);
    if (!body.empty()) lines.push_back(Line{number, std::string(body)});
  }
  return lines;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

double parse_number(std::string_view s, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw FormatError(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw FormatError(line, "expected a nonnegative integer, got '" + std::string(s) + "'");
  }
  return v;
}

// "[a, b, c]" -> items, rejecting missing brackets.
std::vector<std::string> parse_bracket_list(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw FormatError(line, "expected a [..] list, got '" + std::string(s) + "'");
  }
  return split_on(s.substr(1, s.size() - 2), ',');
}

std::string unquote(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
    throw FormatError(line, "expected a quoted expression, got '" + std::string(s) + "'");
  }
  return std::string(s.substr(1, s.size() - 2));
}

Expression parse_anchored(const std::string& text, std::size_t line) {
  try {
    return parse_expression(text);
  } catch (const ParseError& e) {
    throw FormatError(line, std::string("in expression: ") + e.what());
  }
}

// `key = value` splitter; returns false when the line has no '='.
bool key_value(const std::string& text, std::string& key, std::string& value) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) return false;
  key = std::string(trim(std::string_view(text).substr(0, eq)));
  value = std::string(trim(std::string_view(text).substr(eq + 1)));
  return true;
}

// Splits "coeff * dx^dy" at the last '*' whose suffix is a wedge over the
// chart. Returns false when no split position yields a wedge.
bool split_term(const std::string& text, const CoordinateChart& chart, std::string& coeff,
                MultiIndex& wedge, std::string& reason) {
  const auto try_wedge = [&](std::string_view s) -> bool {
    wedge.clear();
    for (const std::string& factor : split_on(s, '^')) {
      if (factor.size() < 2 || factor[0] != 'd' || !is_identifier(factor)) return false;
      const std::string name = factor.substr(1);
      int pos = -1;
      for (std::size_t i = 0; i < chart.names.size(); ++i) {
        if (chart.names[i] == name) pos = static_cast<int>(i);
      }
      if (pos < 0) {
        reason = "'" + name + "' is not a coordinate of the form";
        return false;
      }
      wedge.push_back(pos);
    }
    return !wedge.empty();
  };

  reason.clear();
  for (std::size_t i = text.size(); i-- > 0;) {
    if (text[i] != '*') continue;
    if (try_wedge(trim(std::string_view(text).substr(i + 1)))) {
      coeff = std::string(trim(std::string_view(text).substr(0, i)));
      return true;
    }
  }
  return false;
}

struct Table {
  std::vector<GridAxis> axes;
  std::vector<std::string> value_names;
  std::vector<std::vector<double>> value_columns;
};

// Shared reader for the grid CSV layout: metadata comments, header, then one
// row per node in storage order with the coordinate columns cross-checked
// against the declared lattice.
Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(0, "cannot open '" + path + "'");

  std::map<std::string, std::pair<std::size_t, std::string>> meta;
  std::string raw;
  std::size_t number = 0;
  std::string header;
  std::size_t header_line = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string_view body = trim(raw);
    if (body.empty()) continue;
    if (body.front() == '#') {
      std::string key, value;
      if (key_value(std::string(trim(body.substr(1))), key, value) &&
          !meta.emplace(key, std::make_pair(number, value)).second) {
        throw FormatError(number, "duplicate metadata key '" + key + "'");
      }
      continue;
    }
    header = std::string(body);
    header_line = number;
    break;
  }
  for (const char* key : {"names", "mins", "maxs", "counts"}) {
    if (!meta.count(key)) throw FormatError(number, std::string("missing '# ") + key + " = ..'");
  }

  const auto names = split_on(meta["names"].second, ',');
  const auto mins = split_on(meta["mins"].second, ',');
  const auto maxs = split_on(meta["maxs"].second, ',');
  const auto counts = split_on(meta["counts"].second, ',');
  const std::size_t m = names.size();
  if (m == 0 || mins.size() != m || maxs.size() != m || counts.size() != m) {
    throw FormatError(meta["names"].first, "names, mins, maxs, counts must agree in length");
  }
  std::vector<GridAxis> axes(m);
  for (std::size_t a = 0; a < m; ++a) {
    axes[a] = GridAxis{names[a], parse_number(mins[a], meta["mins"].first),
                       parse_number(maxs[a], meta["maxs"].first),
                       parse_count(counts[a], meta["counts"].first)};
  }

  if (header.empty()) throw FormatError(number, "missing header row");
  const auto columns = split_on(header, ',');
  if (columns.size() <= m) throw FormatError(header_line, "header row has no value columns");
  for (std::size_t a = 0; a < m; ++a) {
    if (columns[a] != axes[a].name) {
      throw FormatError(header_line, "header column " + std::to_string(a + 1) + " is '" +
                                         columns[a] + "', expected axis '" + axes[a].name + "'");
    }
  }

  Table t;
  t.axes = axes;
  t.value_names.assign(columns.begin() + m, columns.end());
  const std::size_t nodes = grid_node_count(axes);
  t.value_columns.assign(t.value_names.size(), {});
  for (auto& col : t.value_columns) col.reserve(nodes);

  std::size_t row = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string_view body = trim(raw);
    if (body.empty()) continue;
    if (row == nodes) {
      throw FormatError(number, "expected " + std::to_string(nodes) + " data rows (axis counts " +
                                    "declare the node count), found more");
    }
    const auto fields = split_on(body, ',');
    if (fields.size() != columns.size()) {
      throw FormatError(number, "row has " + std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(columns.size()));
    }
    const auto tuple = grid_node_tuple(axes, row);
    for (std::size_t a = 0; a < m; ++a) {
      const double got = parse_number(fields[a], number);
      const double want = axes[a].coordinate(tuple[a]);
      if (std::abs(got - want) > 1e-9 * (1.0 + std::abs(want))) {
        throw FormatError(number, "coordinate '" + axes[a].name + "' is " + fields[a] +
                                      ", lattice expects " + format_double(want));
      }
    }
    for (std::size_t c = 0; c < t.value_columns.size(); ++c) {
      t.value_columns[c].push_back(parse_number(fields[m + c], number));
    }
    ++row;
  }
  if (row != nodes) {
    throw FormatError(number, "expected " + std::to_string(nodes) + " data rows, found " +
                                  std::to_string(row));
  }
  return t;
}

}  // namespace

DifferentialForm read_form_file(const std::string& path) {
  std::optional<int> degree;
  std::size_t degree_line = 0;
  std::optional<std::vector<std::string>> names;
  std::optional<std::vector<int>> signature;
  std::vector<Line> terms;

  for (const Line& line : read_content_lines(path)) {
    std::string key, value;
    const bool kv = key_value(line.text, key, value);
    if (kv && key == "degree") {
      if (degree) throw FormatError(line.number, "duplicate 'degree'");
      degree = static_cast<int>(parse_count(value, line.number));
      degree_line = line.number;
    } else if (kv && key == "coordinates") {
      if (names) throw FormatError(line.number, "duplicate 'coordinates'");
      names = parse_bracket_list(value, line.number);
      std::set<std::string> seen;
      for (const std::string& n : *names) {
        if (!is_identifier(n)) throw FormatError(line.number, "bad coordinate name '" + n + "'");
        if (!seen.insert(n).second) {
          throw FormatError(line.number, "duplicate coordinate '" + n + "'");
        }
      }
    } else if (kv && key == "signature") {
      if (signature) throw FormatError(line.number, "duplicate 'signature'");
      signature.emplace();
      for (const std::string& item : parse_bracket_list(value, line.number)) {
        const double v = parse_number(item, line.number);
        if (v != 1.0 && v != -1.0) {
          throw FormatError(line.number, "signature entries must be +1 or -1");
        }
        signature->push_back(v > 0 ? 1 : -1);
      }
    } else {
      terms.push_back(line);
    }
  }

  if (!degree) throw FormatError(0, "missing 'degree = ..'");
  if (!names) throw FormatError(0, "missing 'coordinates = [..]'");
  if (signature && signature->size() != names->size()) {
    throw FormatError(0, "signature length does not match the coordinate count");
  }
  if (*degree < 0 || static_cast<std::size_t>(*degree) > names->size()) {
    throw FormatError(degree_line, "degree must lie between 0 and the coordinate count");
  }

  const CoordinateChart chart = CoordinateChart::make(*names, signature);
  DifferentialForm form(chart, *degree);
  for (const Line& line : terms) {
    std::string coeff_text;
    MultiIndex wedge;
    std::string reason;
    if (*degree == 0) {
      coeff_text = line.text;
    } else if (!split_term(line.text, chart, coeff_text, wedge, reason)) {
      throw FormatError(line.number, reason.empty()
                                         ? "expected '<coefficient> * d<name>^d<name>..'"
                                         : reason);
    }
    if (wedge.size() != static_cast<std::size_t>(*degree)) {
      throw FormatError(line.number, "term has " + std::to_string(wedge.size()) +
                                         " differentials, form degree is " +
                                         std::to_string(*degree));
    }
    std::set<int> distinct(wedge.begin(), wedge.end());
    if (distinct.size() != wedge.size()) {
      throw FormatError(line.number, "repeated differential in one term");
    }
    form.add_term(wedge, parse_anchored(coeff_text, line.number));
  }
  return form;
}

ProblemFile read_problem_file(const std::string& path) {
  enum class Section { None, Coordinates, Unknown, Equation, Strip };
  Section section = Section::None;

  std::vector<std::string> coordinates;
  std::string unknown;
  std::optional<Expression> equation;
  std::optional<std::string> param;
  std::optional<std::pair<double, double>> range;
  std::optional<std::size_t> samples;
  std::map<std::size_t, Expression> x_entries;
  std::map<std::size_t, Expression> p_entries;
  std::optional<Expression> u;

  const auto indexed = [](const std::string& key, const char* prefix,
                          std::size_t& idx) -> bool {
    const std::string_view pre(prefix);
    if (key.size() <= pre.size() || key.compare(0, pre.size(), pre) != 0) return false;
    const std::string_view digits = std::string_view(key).substr(pre.size());
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || end != digits.data() + digits.size() || v == 0) return false;
    idx = v;
    return true;
  };

  for (const Line& line : read_content_lines(path)) {
    if (line.text.front() == '[') {
      if (line.text == "[coordinates]") {
        section = Section::Coordinates;
      } else if (line.text == "[unknown]") {
        section = Section::Unknown;
      } else if (line.text == "[equation]") {
        section = Section::Equation;
      } else if (line.text == "[strip]") {
        section = Section::Strip;
      } else {
        throw FormatError(line.number, "unknown section " + line.text);
      }
      continue;
    }

    switch (section) {
      case Section::None:
        throw FormatError(line.number, "content before the first section header");
      case Section::Coordinates:
        for (const std::string& name : split_on(line.text, ',')) {
          if (!is_identifier(name)) {
            throw FormatError(line.number, "bad coordinate name '" + name + "'");
          }
          coordinates.push_back(name);
        }
        break;
      case Section::Unknown:
        if (!unknown.empty() || !is_identifier(line.text)) {
          throw FormatError(line.number, "section [unknown] holds exactly one name");
        }
        unknown = line.text;
        break;
      case Section::Equation: {
        std::string key, value;
        if (!key_value(line.text, key, value) || key != "F") {
          throw FormatError(line.number, "section [equation] holds 'F = \"<expression>\"'");
        }
        if (equation) throw FormatError(line.number, "duplicate equation");
        equation = parse_anchored(unquote(value, line.number), line.number);
        break;
      }
      case Section::Strip: {
        std::string key, value;
        if (!key_value(line.text, key, value)) {
          throw FormatError(line.number, "expected 'key = value' in [strip]");
        }
        std::size_t idx = 0;
        if (key == "param") {
          if (param) throw FormatError(line.number, "duplicate 'param'");
          if (!is_identifier(value)) throw FormatError(line.number, "bad parameter name");
          param = value;
        } else if (key == "range") {
          if (range) throw FormatError(line.number, "duplicate 'range'");
          const auto items = parse_bracket_list(value, line.number);
          if (items.size() != 2) throw FormatError(line.number, "range needs two endpoints");
          range = {parse_number(items[0], line.number), parse_number(items[1], line.number)};
        } else if (key == "samples") {
          if (samples) throw FormatError(line.number, "duplicate 'samples'");
          samples = parse_count(value, line.number);
        } else if (key == "u") {
          if (u) throw FormatError(line.number, "duplicate 'u'");
          u = parse_anchored(unquote(value, line.number), line.number);
        } else if (indexed(key, "x_", idx)) {
          if (!x_entries.emplace(idx, parse_anchored(unquote(value, line.number), line.number))
                   .second) {
            throw FormatError(line.number, "duplicate '" + key + "'");
          }
        } else if (indexed(key, "p_", idx)) {
          if (!p_entries.emplace(idx, parse_anchored(unquote(value, line.number), line.number))
                   .second) {
            throw FormatError(line.number, "duplicate '" + key + "'");
          }
        } else {
          throw FormatError(line.number, "unknown [strip] key '" + key + "'");
        }
        break;
      }
    }
  }

  if (coordinates.empty()) throw FormatError(0, "missing [coordinates]");
  if (unknown.empty()) throw FormatError(0, "missing [unknown]");
  if (!equation) throw FormatError(0, "missing [equation]");
  if (!param) throw FormatError(0, "missing 'param' in [strip]");
  if (!range) throw FormatError(0, "missing 'range' in [strip]");
  if (!samples) throw FormatError(0, "missing 'samples' in [strip]");
  if (!u) throw FormatError(0, "missing 'u' in [strip]");

  const std::size_t n = coordinates.size();
  StripSpec strip;
  strip.param = *param;
  strip.range_begin = range->first;
  strip.range_end = range->second;
  strip.sample_count = *samples;
  strip.x.resize(n);
  strip.u = *u;
  strip.p.assign(n, std::nullopt);
  strip.p_seed.assign(n, std::nullopt);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto it = x_entries.find(i);
    if (it == x_entries.end()) {
      throw FormatError(0, "missing 'x_" + std::to_string(i) + "' in [strip]");
    }
    strip.x[i - 1] = it->second;
  }
  for (const auto& [i, expr] : x_entries) {
    if (i > n) throw FormatError(0, "'x_" + std::to_string(i) + "' exceeds the coordinate count");
  }
  for (const auto& [i, expr] : p_entries) {
    if (i > n) throw FormatError(0, "'p_" + std::to_string(i) + "' exceeds the coordinate count");
    strip.p[i - 1] = expr;
  }

  return ProblemFile{PdeProblem::make(coordinates, unknown, *equation), std::move(strip)};
}

GridField read_grid_csv(const std::string& path) {
  Table t = read_table(path);
  const std::size_t m = t.axes.size();
  const bool has_psi = t.value_names.size() == m + 1 && t.value_names.back() == "psi";
  if (t.value_names.size() != m && !has_psi) {
    throw FormatError(0, "expected value columns A_1..A_" + std::to_string(m) +
                             " with optional trailing psi");
  }
  for (std::size_t c = 0; c < m; ++c) {
    const std::string want = "A_" + std::to_string(c + 1);
    if (t.value_names[c] != want) {
      throw FormatError(0, "value column " + std::to_string(c + 1) + " is '" + t.value_names[c] +
                               "', expected '" + want + "'");
    }
  }
  std::optional<std::vector<double>> psi;
  if (has_psi) {
    psi = std::move(t.value_columns.back());
    t.value_columns.pop_back();
  }
  return GridField::make(std::move(t.axes), std::move(t.value_columns), std::move(psi));
}

ScalarGrid read_scalar_csv(const std::string& path) {
  Table t = read_table(path);
  if (t.value_names.size() != 1 || t.value_names[0] != "det") {
    throw FormatError(0, "expected a single value column named 'det'");
  }
  return ScalarGrid::make(std::move(t.axes), std::move(t.value_columns[0]));
}

namespace {

void write_header(std::ostream& out, std::size_t n, bool with_r) {
  if (with_r) out << "r,";
  out << "s";
  for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",u";
  for (std::size_t i = 1; i <= n; ++i) out << ",p_" << i;
  out << ",F_residual\n";
}

void write_rows(std::ostream& out, const CharacteristicTrajectory& trajectory, bool with_r) {
  for (const TrajectorySample& s : trajectory.samples) {
    if (with_r) out << format_double(trajectory.r) << ',';
    out << format_double(s.s);
    for (double x : s.x) out << ',' << format_double(x);
    out << ',' << format_double(s.u);
    for (double p : s.p) out << ',' << format_double(p);
    out << ',' << format_double(s.f_residual) << '\n';
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const CharacteristicTrajectory& trajectory) {
  write_header(out, trajectory.samples.front().x.size(), false);
  write_rows(out, trajectory, false);
}

void write_trajectories_csv(std::ostream& out,
                            const std::vector<CharacteristicTrajectory>& trajectories) {
  write_header(out, trajectories.front().samples.front().x.size(), true);
  for (const CharacteristicTrajectory& t : trajectories) write_rows(out, t, true);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();
  const std::uint64_t h =
      fnv1a64(std::as_bytes(std::span<const char>(data.data(), data.size())));
  char buf[17] = {};
  for (int i = 0; i < 16; ++i) buf[i] = "0123456789abcdef"[(h >> (60 - 4 * i)) & 0xf];
  return std::string(buf, 16);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::SpanEnd: return "span_end";
    case Termination::Blowup: return "blowup";
    case Termination::DomainExit: return "domain_exit";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  return v == Verdict::Identical ? "Identical" : "Nonidentical";
}

const char* to_string(ClosureVerdict v) {
  switch (v) {
    case ClosureVerdict::ClosedSymbolic: return "ClosedSymbolic";
    case ClosureVerdict::NotClosed: return "NotClosed";
    case ClosureVerdict::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

}  // namespace sform
