#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adwords/params.hpp"
#include "adwords/rational.hpp"

namespace adwords {

enum class Sense { kLe, kGe, kEq };

/// Dense-ish LP: maximize c'x subject to rows, x >= 0. Coefficients are
/// exact; the solver pivots in doubles and certifies exactly.
struct LinearProgram {
  struct Row {
    std::string name;
    std::vector<std::pair<int, Rat>> coeffs;  // sorted by variable index
    Sense sense = Sense::kGe;
    Rat rhs;
  };

  std::vector<std::string> var_names;
  std::vector<Rat> objective;  // maximize
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(var_names.size()); }
  int add_var(const std::string& name, const Rat& obj = Rat(0));
  void add_row(std::string name, std::vector<std::pair<int, Rat>> coeffs,
               Sense sense, Rat rhs);
  /// Plain-text export (objective + one constraint per line) for
  /// cross-checks against external solvers.
  std::string to_text() const;
};

struct LpSolution {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kStalled };
  Status status = Status::kStalled;
  std::vector<Rat> values;  // exact variable assignment
  Rat objective;
  Rat max_violation;   // exact re-substitution over all rows
  bool exact_vertex = false;  // reconstructed from the tight set
  int pivots = 0;
};

/// Deterministic two-phase simplex (double pivoting, Bland fallback), then
/// exact reconstruction of the optimal vertex from its tight constraints and
/// exact re-substitution into every row.
LpSolution solve(const LinearProgram& lp);

/// Exact violation of the worst row at the given point (0 if feasible).
Rat max_violation(const LinearProgram& lp, const std::vector<Rat>& x);

/// The basic factor LP, truncated at kmax.
/// Variables: Gamma, dalpha(1..kmax), dbeta(1..kmax).
LinearProgram build_basic_lp(const Rat& gamma, int kmax);

/// The hybrid factor LP: Gamma plus the ten truncated sequences, constraints
/// C1..C10 and the left/right pairing feasibility cells.
LinearProgram build_hybrid_lp(const Rat& gamma, int kmax);

struct CertificateIssue {
  std::string constraint;
  Rat violation;
};

/// Exact re-substitution of a basic table into every constraint family of the
/// basic factor LP. For infinite tables, per-k families are checked for
/// k <= kcheck and the infinite tails are evaluated in closed form.
/// Returns the worst violation (0 if certified) plus per-constraint issues.
Rat certify_basic_table(const BasicTable& table, int kcheck,
                        std::vector<CertificateIssue>* issues = nullptr);

/// Exact re-substitution of a hybrid table into C1..C10 and all cells.
Rat certify_hybrid_table(const HybridTable& table,
                         std::vector<CertificateIssue>* issues = nullptr);

/// Equality residuals of the two constraints the closed form pins to
/// equality (beta-bound-not-to-a at every k, and bound-at-limit).
Rat closed_form_equality_residual(const BasicTable& table, int kcheck);

/// Table from an LP solution. Beta rows are recomputed exactly as dx -
/// dalpha so the allocator identity Pbar == D is exact; Gamma is re-derived
/// as the largest exactly-certified value, clamped to the solver's.
/// Throws on re-certification failure.
BasicTable export_basic_table(const Rat& gamma, int kmax,
                              const LpSolution& solution);
HybridTable export_hybrid_table(const Rat& gamma, int kmax,
                                const LpSolution& solution);

}  // namespace adwords
