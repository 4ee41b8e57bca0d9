#pragma once

#include "sform/charpit.hpp"
#include "sform/forms.hpp"
#include "sform/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

namespace sform {

// Text file formats read and written by the command-line tool. The exact
// grammars live in docs/formats.md; every reader throws FormatError with the
// 1-based line number of the offending line.

// Form file: `degree = p`, `coordinates = [x, y, ..]`, optional
// `signature = [+1, -1, ..]`, then one term per line `<coeff> * dx^dy`
// (a bare expression line for degree 0). `#` starts a comment.
DifferentialForm read_form_file(const std::string& path);

// Problem file: sections [coordinates], [unknown], [equation], [strip].
struct ProblemFile {
  PdeProblem problem;
  StripSpec strip;
};

ProblemFile read_problem_file(const std::string& path);

// Grid CSV: `# names/mins/maxs/counts = ..` metadata lines, then a header row
// `xi_1,..,xi_m,A_1,..,A_m[,psi]` and one row per node in storage order
// (first axis fastest). The scalar variant carries a single `det` column.
GridField read_grid_csv(const std::string& path);
ScalarGrid read_scalar_csv(const std::string& path);

// Trajectory CSV: header `s,x_1..x_n,u,p_1..p_n,F_residual`, prefixed by an
// `r` column when several trajectories share the file.
void write_trajectory_csv(std::ostream& out, const CharacteristicTrajectory& trajectory);
void write_trajectories_csv(std::ostream& out,
                            const std::vector<CharacteristicTrajectory>& trajectories);

// Shortest decimal that round-trips to the same double; "inf"/"nan" spelled
// out. All numeric output of the tool goes through this one formatter.
std::string format_double(double v);

// FNV-1a 64-bit content digest, printed as 16 hex digits.
std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::string digest_file(const std::string& path);

const char* to_string(Termination t);
const char* to_string(Verdict v);
const char* to_string(ClosureVerdict v);

}  // namespace sform
