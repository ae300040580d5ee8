#include "adwords/factor_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace adwords {

int LinearProgram::add_var(const std::string& name, const Rat& obj) {
  var_names.push_back(name);
  objective.push_back(obj);
  return static_cast<int>(var_names.size()) - 1;
}

void LinearProgram::add_row(std::string name,
                            std::vector<std::pair<int, Rat>> coeffs,
                            Sense sense, Rat rhs) {
  // Merge duplicate indices, drop zeros, keep sorted.
  std::map<int, Rat> merged;
  for (auto& [j, c] : coeffs) merged[j] += c;
  Row row;
  row.name = std::move(name);
  row.sense = sense;
  row.rhs = std::move(rhs);
  for (auto& [j, c] : merged)
    if (!c.is_zero()) row.coeffs.emplace_back(j, c);
  rows.push_back(std::move(row));
}

std::string LinearProgram::to_text() const {
  std::ostringstream out;
  out << "maximize";
  for (int j = 0; j < num_vars(); ++j)
    if (!objective[static_cast<std::size_t>(j)].is_zero())
      out << " + " << objective[static_cast<std::size_t>(j)].to_string() << " "
          << var_names[static_cast<std::size_t>(j)];
  out << "\nsubject to\n";
  for (const Row& row : rows) {
    out << "  " << row.name << ":";
    for (const auto& [j, c] : row.coeffs)
      out << " + " << c.to_string() << " "
          << var_names[static_cast<std::size_t>(j)];
    switch (row.sense) {
      case Sense::kLe: out << " <= "; break;
      case Sense::kGe: out << " >= "; break;
      case Sense::kEq: out << " = "; break;
    }
    out << row.rhs.to_string() << "\n";
  }
  out << "  all variables >= 0\n";
  return out.str();
}

Rat max_violation(const LinearProgram& lp, const std::vector<Rat>& x) {
  Rat worst(0);
  for (const auto& row : lp.rows) {
    Rat lhs(0);
    for (const auto& [j, c] : row.coeffs)
      lhs += c * x[static_cast<std::size_t>(j)];
    Rat v(0);
    switch (row.sense) {
      case Sense::kLe: v = lhs - row.rhs; break;
      case Sense::kGe: v = row.rhs - lhs; break;
      case Sense::kEq: v = abs(lhs - row.rhs); break;
    }
    if (v > worst) worst = v;
  }
  for (const Rat& xi : x)
    if (-xi > worst) worst = -xi;
  return worst;
}

namespace {

constexpr double kEps = 1e-9;
constexpr double kPivotEps = 1e-7;

// Classic dense two-phase tableau simplex. Deterministic: Dantzig rule with
// a permanent switch to Bland's rule after a stall budget.
class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp) : lp_(lp) {}

  LpSolution::Status run(std::vector<double>& x_out, std::vector<bool>& row_tight,
                         std::vector<bool>& var_zero, int& pivots_out) {
    build();
    // Phase 1: maximize -sum(artificials).
    if (num_artificial_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (int j = art_begin_; j < art_begin_ + num_artificial_; ++j)
        phase1[static_cast<std::size_t>(j)] = -1.0;
      set_objective(phase1);
      Status s = iterate();
      if (s != Status::kOptimal) return map_status(s);
      if (objective_value() < -1e-7) return LpSolution::Status::kInfeasible;
      purge_artificials();
    }
    std::vector<double> phase2(cols_, 0.0);
    for (int j = 0; j < lp_.num_vars(); ++j)
      phase2[static_cast<std::size_t>(j)] =
          lp_.objective[static_cast<std::size_t>(j)].to_double();
    set_objective(phase2);
    banned_from_ = art_begin_;  // artificials may not re-enter
    Status s = iterate();
    if (s != Status::kOptimal) return map_status(s);
    x_out.assign(static_cast<std::size_t>(lp_.num_vars()), 0.0);
    std::vector<bool> basic(static_cast<std::size_t>(cols_), false);
    for (int i = 0; i < m_; ++i) {
      int bj = basis_[static_cast<std::size_t>(i)];
      basic[static_cast<std::size_t>(bj)] = true;
      if (bj < lp_.num_vars())
        x_out[static_cast<std::size_t>(bj)] =
            tab_[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols_)];
    }
    // A row is tight when its slack is nonbasic; a variable is pinned to
    // zero when nonbasic. These n facts determine the vertex exactly.
    row_tight.assign(static_cast<std::size_t>(m_), false);
    for (int i = 0; i < m_; ++i) {
      int sj = slack_of_row_[static_cast<std::size_t>(i)];
      row_tight[static_cast<std::size_t>(i)] =
          (sj < 0) || !basic[static_cast<std::size_t>(sj)];
    }
    var_zero.assign(static_cast<std::size_t>(lp_.num_vars()), false);
    for (int j = 0; j < lp_.num_vars(); ++j)
      var_zero[static_cast<std::size_t>(j)] = !basic[static_cast<std::size_t>(j)];
    pivots_out = pivots_;
    return LpSolution::Status::kOptimal;
  }

 private:
  enum class Status { kOptimal, kUnbounded, kStalled };

  static LpSolution::Status map_status(Status s) {
    switch (s) {
      case Status::kOptimal: return LpSolution::Status::kOptimal;
      case Status::kUnbounded: return LpSolution::Status::kUnbounded;
      case Status::kStalled: return LpSolution::Status::kStalled;
    }
    return LpSolution::Status::kStalled;
  }

  void build() {
    m_ = static_cast<int>(lp_.rows.size());
    int n = lp_.num_vars();
    int num_slack = 0;
    for (const auto& row : lp_.rows)
      if (row.sense != Sense::kEq) ++num_slack;
    slack_begin_ = n;
    // Artificials: for >= rows (after slack becomes surplus) and = rows.
    art_begin_ = n + num_slack;
    num_artificial_ = 0;
    slack_of_row_.assign(static_cast<std::size_t>(m_), -1);

    // First pass to count artificials with rhs sign folded in.
    std::vector<double> rhs(static_cast<std::size_t>(m_));
    std::vector<int> dir(static_cast<std::size_t>(m_), +1);
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp_.rows[static_cast<std::size_t>(i)];
      double b = row.rhs.to_double();
      Sense sense = row.sense;
      if (b < 0) {
        dir[static_cast<std::size_t>(i)] = -1;
        b = -b;
        if (sense == Sense::kLe)
          sense = Sense::kGe;
        else if (sense == Sense::kGe)
          sense = Sense::kLe;
      }
      rhs[static_cast<std::size_t>(i)] = b;
      eff_sense_.push_back(sense);
      if (sense != Sense::kLe) ++num_artificial_;
    }
    cols_ = art_begin_ + num_artificial_;
    tab_.assign(static_cast<std::size_t>(m_),
                std::vector<double>(static_cast<std::size_t>(cols_) + 1, 0.0));
    basis_.assign(static_cast<std::size_t>(m_), -1);
    int next_slack = slack_begin_;
    int next_art = art_begin_;
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp_.rows[static_cast<std::size_t>(i)];
      auto& t = tab_[static_cast<std::size_t>(i)];
      for (const auto& [j, c] : row.coeffs)
        t[static_cast<std::size_t>(j)] =
            dir[static_cast<std::size_t>(i)] * c.to_double();
      t[static_cast<std::size_t>(cols_)] = rhs[static_cast<std::size_t>(i)];
      Sense sense = eff_sense_[static_cast<std::size_t>(i)];
      if (sense == Sense::kLe) {
        int sj = next_slack++;
        t[static_cast<std::size_t>(sj)] = 1.0;
        slack_of_row_[static_cast<std::size_t>(i)] = sj;
        basis_[static_cast<std::size_t>(i)] = sj;
      } else if (sense == Sense::kGe) {
        int sj = next_slack++;
        t[static_cast<std::size_t>(sj)] = -1.0;
        slack_of_row_[static_cast<std::size_t>(i)] = sj;
        int aj = next_art++;
        t[static_cast<std::size_t>(aj)] = 1.0;
        basis_[static_cast<std::size_t>(i)] = aj;
      } else {
        int aj = next_art++;
        t[static_cast<std::size_t>(aj)] = 1.0;
        basis_[static_cast<std::size_t>(i)] = aj;
      }
    }
    obj_.assign(static_cast<std::size_t>(cols_) + 1, 0.0);
  }

  void set_objective(const std::vector<double>& c) {
    obj_.assign(static_cast<std::size_t>(cols_) + 1, 0.0);
    for (int j = 0; j < cols_; ++j)
      obj_[static_cast<std::size_t>(j)] = -c[static_cast<std::size_t>(j)];
    // Canonicalize: zero out reduced costs of basic columns.
    for (int i = 0; i < m_; ++i) {
      int bj = basis_[static_cast<std::size_t>(i)];
      double f = obj_[static_cast<std::size_t>(bj)];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols_; ++j)
        obj_[static_cast<std::size_t>(j)] -=
            f * tab_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }

  double objective_value() const { return obj_[static_cast<std::size_t>(cols_)]; }

  Status iterate() {
    const int max_pivots = 200000;
    int stall = 0;
    bool bland = false;
    while (true) {
      if (pivots_ > max_pivots) return Status::kStalled;
      int enter = -1;
      if (!bland) {
        double best = -kEps;
        for (int j = 0; j < cols_; ++j) {
          if (j >= banned_from_) break;
          double rc = obj_[static_cast<std::size_t>(j)];
          if (rc < best) {
            best = rc;
            enter = j;
          }
        }
      } else {
        for (int j = 0; j < cols_ && enter < 0; ++j) {
          if (j >= banned_from_) break;
          if (obj_[static_cast<std::size_t>(j)] < -kEps) enter = j;
        }
      }
      if (enter < 0) return Status::kOptimal;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        double a = tab_[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
        if (a <= kPivotEps) continue;
        double ratio =
            tab_[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols_)] / a;
        if (ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] <
                 basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      if (best_ratio < kEps) {
        if (++stall > 200) bland = true;
      } else {
        stall = 0;
      }
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    ++pivots_;
    auto& pr = tab_[static_cast<std::size_t>(row)];
    double p = pr[static_cast<std::size_t>(col)];
    for (double& v : pr) v /= p;
    pr[static_cast<std::size_t>(col)] = 1.0;  // exact
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      auto& r = tab_[static_cast<std::size_t>(i)];
      double f = r[static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols_; ++j)
        r[static_cast<std::size_t>(j)] -= f * pr[static_cast<std::size_t>(j)];
      r[static_cast<std::size_t>(col)] = 0.0;
    }
    double f = obj_[static_cast<std::size_t>(col)];
    if (f != 0.0) {
      for (int j = 0; j <= cols_; ++j)
        obj_[static_cast<std::size_t>(j)] -= f * pr[static_cast<std::size_t>(j)];
      obj_[static_cast<std::size_t>(col)] = 0.0;
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // After phase 1, pivot basic artificials out where possible.
  void purge_artificials() {
    for (int i = 0; i < m_; ++i) {
      int bj = basis_[static_cast<std::size_t>(i)];
      if (bj < art_begin_) continue;
      int enter = -1;
      for (int j = 0; j < art_begin_; ++j) {
        if (std::fabs(tab_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) >
            kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) pivot(i, enter);
      // Otherwise the row is redundant; its artificial stays basic at 0.
    }
  }

  const LinearProgram& lp_;
  int m_ = 0, cols_ = 0;
  int slack_begin_ = 0, art_begin_ = 0, num_artificial_ = 0;
  int banned_from_ = std::numeric_limits<int>::max();
  int pivots_ = 0;
  std::vector<std::vector<double>> tab_;
  std::vector<double> obj_;
  std::vector<int> basis_;
  std::vector<int> slack_of_row_;
  std::vector<Sense> eff_sense_;
};

// One linear equation over the structural variables.
struct Equation {
  std::vector<BigInt> coeffs;  // integer-scaled
  Rat rhs;
};

// Solve for the unique point satisfying a maximal independent subset of the
// candidate equations. Row selection happens in double precision; the chosen
// square system is then solved fraction-free (Bareiss): the coefficient
// matrix stays integral, only the rhs column turns rational. Returns false
// if the candidates do not pin down all variables.
bool solve_tight_system(const std::vector<Equation>& eqs, int n,
                        std::vector<Rat>& solution) {
  const std::size_t m = eqs.size();
  if (m < static_cast<std::size_t>(n)) return false;

  // Rank-revealing pass in doubles to pick n independent equations.
  std::vector<std::vector<double>> d(m);
  for (std::size_t r = 0; r < m; ++r) {
    d[r].resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      d[r][static_cast<std::size_t>(j)] =
          eqs[r].coeffs[static_cast<std::size_t>(j)].to_double();
  }
  std::vector<bool> taken(m, false);
  std::vector<std::size_t> chosen;
  for (int col = 0; col < n; ++col) {
    std::size_t pick = m;
    double best = 1e-11;
    for (std::size_t r = 0; r < m; ++r) {
      if (taken[r]) continue;
      double a = std::fabs(d[r][static_cast<std::size_t>(col)]);
      if (a > best) {
        best = a;
        pick = r;
      }
    }
    if (pick == m) return false;
    taken[pick] = true;
    chosen.push_back(pick);
    for (std::size_t r = 0; r < m; ++r) {
      if (taken[r]) continue;
      double f = d[r][static_cast<std::size_t>(col)] /
                 d[pick][static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j)
        d[r][static_cast<std::size_t>(j)] -=
            f * d[pick][static_cast<std::size_t>(j)];
    }
  }

  // Exact Bareiss elimination on the selected square system.
  std::vector<std::vector<BigInt>> a(static_cast<std::size_t>(n));
  std::vector<Rat> b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = eqs[chosen[static_cast<std::size_t>(i)]].coeffs;
    b[static_cast<std::size_t>(i)] = eqs[chosen[static_cast<std::size_t>(i)]].rhs;
  }
  BigInt prev(1);
  for (int col = 0; col < n; ++col) {
    // The double pass aligned row i with column i, but confirm exactly.
    if (a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)].is_zero()) {
      int swap_with = -1;
      for (int r = col + 1; r < n; ++r)
        if (!a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].is_zero()) {
          swap_with = r;
          break;
        }
      if (swap_with < 0) return false;
      std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(swap_with)]);
      std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(swap_with)]);
    }
    const BigInt pivot = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
    for (int r = col + 1; r < n; ++r) {
      const BigInt f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
      for (int j = col; j < n; ++j) {
        auto& cell = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        cell = (pivot * cell -
                f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)]) /
               prev;
      }
      b[static_cast<std::size_t>(r)] =
          (Rat(pivot, BigInt(1)) * b[static_cast<std::size_t>(r)] -
           Rat(f, BigInt(1)) * b[static_cast<std::size_t>(col)]) /
          Rat(prev, BigInt(1));
    }
    prev = pivot;
  }
  solution.assign(static_cast<std::size_t>(n), Rat(0));
  for (int i = n - 1; i >= 0; --i) {
    Rat acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      const BigInt& c = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!c.is_zero())
        acc -= Rat(c, BigInt(1)) * solution[static_cast<std::size_t>(j)];
    }
    solution[static_cast<std::size_t>(i)] =
        acc / Rat(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)], BigInt(1));
  }
  return true;
}

Equation scale_row_to_integer(const LinearProgram::Row& row, int n) {
  Equation eq;
  eq.coeffs.assign(static_cast<std::size_t>(n), BigInt(0));
  BigInt lcm(1);
  for (const auto& [j, c] : row.coeffs) {
    (void)j;
    BigInt d = c.den();
    BigInt g = BigInt::gcd(lcm, d);
    lcm = lcm / g * d;
  }
  for (const auto& [j, c] : row.coeffs)
    eq.coeffs[static_cast<std::size_t>(j)] = c.num() * (lcm / c.den());
  eq.rhs = row.rhs * Rat(lcm, BigInt(1));
  return eq;
}

}  // namespace

LpSolution solve(const LinearProgram& lp) {
  LpSolution sol;
  Simplex simplex(lp);
  std::vector<double> x;
  std::vector<bool> row_tight, var_zero;
  sol.status = simplex.run(x, row_tight, var_zero, sol.pivots);
  if (sol.status != LpSolution::Status::kOptimal) return sol;

  const int n = lp.num_vars();
  // Tight equations read off the final basis: equality rows, rows whose
  // slack is nonbasic, and nonbasic (zero) variables.
  std::vector<Equation> candidates;
  for (std::size_t r = 0; r < lp.rows.size(); ++r)
    if (row_tight[r]) candidates.push_back(scale_row_to_integer(lp.rows[r], n));
  for (int j = 0; j < n; ++j) {
    if (var_zero[static_cast<std::size_t>(j)]) {
      Equation eq;
      eq.coeffs.assign(static_cast<std::size_t>(n), BigInt(0));
      eq.coeffs[static_cast<std::size_t>(j)] = BigInt(1);
      eq.rhs = Rat(0);
      candidates.push_back(std::move(eq));
    }
  }

  auto try_exact = [&](const std::vector<Equation>& eqs) {
    std::vector<Rat> exact;
    if (!solve_tight_system(eqs, n, exact)) return false;
    if (!max_violation(lp, exact).is_zero()) return false;
    sol.values = std::move(exact);
    sol.exact_vertex = true;
    sol.max_violation = Rat(0);
    sol.objective = Rat(0);
    for (int j = 0; j < n; ++j)
      sol.objective += lp.objective[static_cast<std::size_t>(j)] *
                       sol.values[static_cast<std::size_t>(j)];
    return true;
  };
  if (try_exact(candidates)) return sol;

  // Second attempt: tolerance-based tight detection. The basis facts can be
  // off after long degenerate runs when constants sit near double noise.
  std::vector<Equation> relaxed;
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (const auto& [j, c] : row.coeffs)
      lhs += c.to_double() * x[static_cast<std::size_t>(j)];
    double b = row.rhs.to_double();
    if (row.sense == Sense::kEq ||
        std::fabs(lhs - b) <= 1e-7 * std::max(1.0, std::fabs(b)))
      relaxed.push_back(scale_row_to_integer(row, n));
  }
  for (int j = 0; j < n; ++j) {
    if (std::fabs(x[static_cast<std::size_t>(j)]) <= 1e-9) {
      Equation eq;
      eq.coeffs.assign(static_cast<std::size_t>(n), BigInt(0));
      eq.coeffs[static_cast<std::size_t>(j)] = BigInt(1);
      eq.rhs = Rat(0);
      relaxed.push_back(std::move(eq));
    }
  }
  if (try_exact(relaxed)) return sol;

  // Fall back to the double solution, measured exactly.
  sol.values.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    sol.values.push_back(Rat::from_double_exact(x[static_cast<std::size_t>(j)]));
  sol.exact_vertex = false;
  sol.max_violation = max_violation(lp, sol.values);
  sol.objective = Rat(0);
  for (int j = 0; j < n; ++j)
    sol.objective +=
        lp.objective[static_cast<std::size_t>(j)] * sol.values[static_cast<std::size_t>(j)];
  return sol;
}

// ---------------------------------------------------------------------------
// Basic factor LP
// ---------------------------------------------------------------------------

namespace {

struct BasicVars {
  int gamma_var = 0;
  std::vector<int> da, db;  // 1-indexed
  int at(const std::vector<int>& v, int k) const {
    return v[static_cast<std::size_t>(k)];
  }
};

BasicVars add_basic_vars(LinearProgram& lp, int kmax) {
  BasicVars v;
  v.gamma_var = lp.add_var("Gamma", Rat(1));
  v.da.assign(static_cast<std::size_t>(kmax) + 1, -1);
  v.db.assign(static_cast<std::size_t>(kmax) + 1, -1);
  for (int k = 1; k <= kmax; ++k)
    v.da[static_cast<std::size_t>(k)] = lp.add_var("da" + std::to_string(k));
  for (int k = 1; k <= kmax; ++k)
    v.db[static_cast<std::size_t>(k)] = lp.add_var("db" + std::to_string(k));
  return v;
}

}  // namespace

LinearProgram build_basic_lp(const Rat& gamma, int kmax) {
  if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  LinearProgram lp;
  BasicVars v = add_basic_vars(lp, kmax);
  BasicTable closed = BasicTable::closed_form(gamma);  // for dx constants

  for (int k = 1; k <= kmax; ++k) {
    lp.add_row("def_x" + std::to_string(k),
               {{v.da[static_cast<std::size_t>(k)], Rat(1)},
                {v.db[static_cast<std::size_t>(k)], Rat(1)}},
               Sense::kEq, closed.dx(k));
  }
  // Against points never offered to a: prefix alpha + 2 dbeta(k+1) >= Gamma.
  for (int k = 0; k <= kmax; ++k) {
    std::vector<std::pair<int, Rat>> c;
    for (int l = 1; l <= k; ++l)
      c.emplace_back(v.da[static_cast<std::size_t>(l)], Rat(1));
    if (k + 1 <= kmax)
      c.emplace_back(v.db[static_cast<std::size_t>(k + 1)], Rat(2));
    c.emplace_back(v.gamma_var, Rat(-1));
    lp.add_row("not_to_a_k" + std::to_string(k), std::move(c), Sense::kGe,
               Rat(0));
  }
  // Superiority of randomized rounds: dbeta(k) >= tail sum beyond k.
  for (int k = 1; k <= kmax; ++k) {
    std::vector<std::pair<int, Rat>> c{{v.db[static_cast<std::size_t>(k)], Rat(1)}};
    for (int l = k + 1; l <= kmax; ++l)
      c.emplace_back(v.db[static_cast<std::size_t>(l)], Rat(-1));
    lp.add_row("rand_vs_det_k" + std::to_string(k), std::move(c), Sense::kGe,
               Rat(0));
  }
  // Semi-assigned case: prefix alpha(k) + tail beta from k >= Gamma.
  for (int k = 1; k <= kmax; ++k) {
    std::vector<std::pair<int, Rat>> c;
    for (int l = 1; l <= k; ++l)
      c.emplace_back(v.da[static_cast<std::size_t>(l)], Rat(1));
    for (int l = k; l <= kmax; ++l)
      c.emplace_back(v.db[static_cast<std::size_t>(l)], Rat(1));
    c.emplace_back(v.gamma_var, Rat(-1));
    lp.add_row("half_to_a_k" + std::to_string(k), std::move(c), Sense::kGe,
               Rat(0));
  }
  // Deterministically assigned case: total alpha >= Gamma.
  {
    std::vector<std::pair<int, Rat>> c;
    for (int l = 1; l <= kmax; ++l)
      c.emplace_back(v.da[static_cast<std::size_t>(l)], Rat(1));
    c.emplace_back(v.gamma_var, Rat(-1));
    lp.add_row("bound_at_limit", std::move(c), Sense::kGe, Rat(0));
  }
  // Monotone dbeta.
  for (int k = 1; k < kmax; ++k) {
    lp.add_row("mono_k" + std::to_string(k),
               {{v.db[static_cast<std::size_t>(k)], Rat(1)},
                {v.db[static_cast<std::size_t>(k + 1)], Rat(-1)}},
               Sense::kGe, Rat(0));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// Hybrid factor LP
// ---------------------------------------------------------------------------

namespace {

// Variable layout for the hybrid LP; index helpers return -1 beyond kmax so
// zero-extended references simply drop out of rows.
struct HybridVars {
  int kmax = 0;
  int gamma_var = 0;
  std::vector<int> a_l_r, a_r_r, a_l_d, a_r_d;
  std::vector<int> b_l_r, b_r_rs, b_r_rl, b_l_d, b_r_d;

  int at(const std::vector<int>& v, int k) const {
    if (k < 1 || k > kmax) return -1;
    return v[static_cast<std::size_t>(k)];
  }
};

using Terms = std::vector<std::pair<int, Rat>>;

void add_term(Terms& t, int var, const Rat& c) {
  if (var >= 0 && !c.is_zero()) t.emplace_back(var, c);
}

HybridVars add_hybrid_vars(LinearProgram& lp, int kmax) {
  HybridVars v;
  v.kmax = kmax;
  v.gamma_var = lp.add_var("Gamma", Rat(1));
  auto mk = [&](const char* stem) {
    std::vector<int> idx(static_cast<std::size_t>(kmax) + 1, -1);
    for (int k = 1; k <= kmax; ++k)
      idx[static_cast<std::size_t>(k)] = lp.add_var(stem + std::to_string(k));
    return idx;
  };
  v.a_l_r = mk("aLR");
  v.a_r_r = mk("aRR");
  v.a_l_d = mk("aLD");
  v.a_r_d = mk("aRD");
  v.b_l_r = mk("bLR");
  v.b_r_rs = mk("bRRS");
  v.b_r_rl = mk("bRRL");
  v.b_l_d = mk("bLD");
  v.b_r_d = mk("bRD");
  return v;
}

// psi builders append the terms of one summand (coefficients on variables).
// Arguments beyond kmax reference zero entries and vanish.
struct PsiBuilder {
  const HybridVars& v;

  void alpha_prefix_left(Terms& t, int k) const {
    for (int l = 1; l <= std::min(k, v.kmax); ++l)
      add_term(t, v.at(v.a_l_r, l), Rat(1));
  }
  void alpha_prefix_right(Terms& t, int k) const {
    for (int l = 1; l <= std::min(k, v.kmax); ++l)
      add_term(t, v.at(v.a_r_r, l), Rat(1));
  }
  void nl_left(Terms& t, int k) const {
    alpha_prefix_left(t, k);
    add_term(t, v.at(v.b_l_r, k + 1), Rat(2));
  }
  void nl_right(Terms& t, int k) const {
    alpha_prefix_right(t, k);
    add_term(t, v.at(v.b_r_rl, k + 1), Rat(2));
  }
  void ns1_left(Terms& t, int k) const {
    alpha_prefix_left(t, k);
    add_term(t, v.at(v.b_l_r, k + 1), Rat(2));
  }
  void ns1_right(Terms& t, int k) const {
    alpha_prefix_right(t, k);
    add_term(t, v.at(v.b_r_rs, k + 1), Rat(2));
  }
  void ns2_left(Terms& t, int k) const {
    alpha_prefix_left(t, k);
    add_term(t, v.at(v.b_r_rs, k), Rat(2));
  }
  void ns2_right(Terms& t, int k) const {
    alpha_prefix_right(t, k);
    add_term(t, v.at(v.b_l_r, k + 1), Rat(2));
  }
  void r_left(Terms& t, int k) const {
    alpha_prefix_left(t, k);
    add_term(t, v.at(v.b_l_d, k), Rat(1));
  }
  void r_right(Terms& t, int k) const {
    alpha_prefix_right(t, k);
    add_term(t, v.at(v.b_r_d, k), Rat(1));
  }
  void d_left(Terms& t, int k) const {
    alpha_prefix_left(t, k - 1);
    add_term(t, v.at(v.a_l_d, k), Rat(1));
  }
  void d_right(Terms& t, int k) const {
    alpha_prefix_right(t, k - 1);
    add_term(t, v.at(v.a_r_d, k), Rat(1));
  }
};

}  // namespace

LinearProgram build_hybrid_lp(const Rat& gamma, int kmax) {
  if (kmax < 2) throw std::invalid_argument("hybrid LP needs kmax >= 2");
  LinearProgram lp;
  HybridVars v = add_hybrid_vars(lp, kmax);
  PsiBuilder psi{v};

  auto dx_l_r = [&](int k) { return HybridTable::dx_left_semi(k); };
  auto dx_l_d = [&](int k) { return HybridTable::dx_left_det(k); };
  auto dx_r_rs = [&](int k) { return HybridTable::dx_right_semi_small(gamma, k); };
  auto dx_r_rl = [&](int k) { return HybridTable::dx_right_semi_large(gamma, k); };
  auto dx_r_d = [&](int k) { return HybridTable::dx_right_det(gamma, k); };

  // Definitional equalities: beta = dx - alpha, row by row.
  for (int k = 1; k <= kmax; ++k) {
    auto def = [&](const char* name, const std::vector<int>& beta,
                   const std::vector<int>& alpha, const Rat& dx) {
      lp.add_row(std::string(name) + std::to_string(k),
                 {{v.at(beta, k), Rat(1)}, {v.at(alpha, k), Rat(1)}},
                 Sense::kEq, dx);
    };
    def("def_bLR", v.b_l_r, v.a_l_r, dx_l_r(k));
    def("def_bRRS", v.b_r_rs, v.a_r_r, dx_r_rs(k));
    def("def_bRRL", v.b_r_rl, v.a_r_r, dx_r_rl(k));
    def("def_bLD", v.b_l_d, v.a_l_d, dx_l_d(k));
    def("def_bRD", v.b_r_d, v.a_r_d, dx_r_d(k));
  }

  auto ge0 = [&](std::string name, Terms t) {
    lp.add_row(std::move(name), std::move(t), Sense::kGe, Rat(0));
  };

  // C1..C3: monotone beta rows in reading order L(k), R(k), L(k+1).
  for (int k = 1; k <= kmax; ++k) {
    auto mono = [&](const char* stem, const std::vector<int>& left,
                    const std::vector<int>& right) {
      Terms t1;
      add_term(t1, v.at(left, k), Rat(1));
      add_term(t1, v.at(right, k), Rat(-1));
      ge0(std::string(stem) + "_lr_k" + std::to_string(k), std::move(t1));
      Terms t2;
      add_term(t2, v.at(right, k), Rat(1));
      add_term(t2, v.at(left, k + 1), Rat(-1));
      ge0(std::string(stem) + "_wrap_k" + std::to_string(k), std::move(t2));
    };
    mono("C1_rl", v.b_l_r, v.b_r_rl);
    mono("C2_rs", v.b_l_r, v.b_r_rs);
    mono("C3_d", v.b_l_d, v.b_r_d);
  }

  // C4: randomized rounds dominate deterministic ones.
  for (int k = 1; k <= kmax; ++k) {
    Terms t1;
    add_term(t1, v.at(v.b_l_r, k), Rat(2));
    add_term(t1, v.at(v.b_l_d, k), Rat(-1));
    ge0("C4_L_k" + std::to_string(k), std::move(t1));
    Terms t2;
    add_term(t2, v.at(v.b_r_rl, k), Rat(2));
    add_term(t2, v.at(v.b_r_d, k), Rat(-1));
    ge0("C4_RL_k" + std::to_string(k), std::move(t2));
    Terms t3;
    add_term(t3, v.at(v.b_r_rs, k), Rat(2));
    add_term(t3, v.at(v.b_r_d, k), Rat(-1));
    ge0("C4_RS_k" + std::to_string(k), std::move(t3));
  }

  // C5/C6 (nonnegativity) are the LP's variable domain.

  // C7/C8: alpha gain of a semi never exceeds the det-gain drop.
  for (int k = 1; k <= kmax; ++k) {
    Terms t1;
    add_term(t1, v.at(v.a_l_d, k), Rat(1));
    add_term(t1, v.at(v.a_l_d, k + 1), Rat(-1));
    add_term(t1, v.at(v.a_l_r, k), Rat(-1));
    ge0("C7_k" + std::to_string(k), std::move(t1));
    Terms t2;
    add_term(t2, v.at(v.a_r_d, k), Rat(1));
    add_term(t2, v.at(v.a_r_d, k + 1), Rat(-1));
    add_term(t2, v.at(v.a_r_r, k), Rat(-1));
    ge0("C8_k" + std::to_string(k), std::move(t2));
  }

  // C9: first small-bid beta on the left is at most Gamma/2.
  {
    Terms t;
    add_term(t, v.gamma_var, Rat(1, 2));
    add_term(t, v.at(v.b_l_r, 1), Rat(-1));
    lp.add_row("C9", std::move(t), Sense::kGe, Rat(0));
  }

  // C10: boundary constraint for k beyond kmax.
  {
    Terms t;
    for (int l = 1; l <= kmax; ++l) {
      add_term(t, v.at(v.a_l_r, l), Rat(1));
      add_term(t, v.at(v.a_r_r, l), Rat(1));
    }
    add_term(t, v.gamma_var, Rat(-2));
    lp.add_row("C10", std::move(t), Sense::kGe, Rat(0));
  }

  // Pairing feasibility cells: each pairing-sum >= 2 Gamma. The row/column
  // names follow the left point's type x the right point's type, with the
  // right point's count written k.
  auto cell = [&](const std::string& name, int k, auto&& left, auto&& right) {
    Terms t;
    left(t, k);
    right(t, k);
    add_term(t, v.gamma_var, Rat(-2));
    lp.add_row(name + "_k" + std::to_string(k), std::move(t), Sense::kGe,
               Rat(0));
  };
  for (int k = 0; k <= kmax; ++k) {
    // First column (right point in Y_N) admits k = 0.
    cell("NN_s", k, [&](Terms& t, int kk) { psi.ns1_left(t, kk); },
         [&](Terms& t, int kk) { psi.ns2_right(t, kk); });
    cell("NN_l", k, [&](Terms& t, int kk) { psi.nl_left(t, kk); },
         [&](Terms& t, int kk) { psi.nl_right(t, kk); });
    cell("N1N_s", k, [&](Terms& t, int kk) { psi.ns2_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.ns1_right(t, kk); });
    cell("N1N_l", k, [&](Terms& t, int kk) { psi.nl_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.nl_right(t, kk); });
    cell("R1N", k, [&](Terms& t, int kk) { psi.r_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.ns1_right(t, kk); });
    cell("D1N", k, [&](Terms& t, int kk) { psi.d_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.ns1_right(t, kk); });
    if (k == 0) continue;
    cell("NR", k, [&](Terms& t, int kk) { psi.ns1_left(t, kk); },
         [&](Terms& t, int kk) { psi.r_right(t, kk); });
    cell("ND", k, [&](Terms& t, int kk) { psi.ns1_left(t, kk); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
    // Row 2, middle column is the impossible case; omitted.
    cell("N1D", k, [&](Terms& t, int kk) { psi.ns1_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
    cell("RN", k, [&](Terms& t, int kk) { psi.r_left(t, kk); },
         [&](Terms& t, int kk) { psi.ns1_right(t, kk); });
    cell("RR", k, [&](Terms& t, int kk) { psi.r_left(t, kk); },
         [&](Terms& t, int kk) { psi.r_right(t, kk); });
    cell("RD", k, [&](Terms& t, int kk) { psi.r_left(t, kk); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
    cell("R1R", k, [&](Terms& t, int kk) { psi.r_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.r_right(t, kk); });
    cell("R1D", k, [&](Terms& t, int kk) { psi.r_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
    cell("DN", k, [&](Terms& t, int kk) { psi.d_left(t, kk); },
         [&](Terms& t, int kk) { psi.ns1_right(t, kk); });
    cell("DR", k, [&](Terms& t, int kk) { psi.d_left(t, kk); },
         [&](Terms& t, int kk) { psi.r_right(t, kk); });
    cell("DD", k, [&](Terms& t, int kk) { psi.d_left(t, kk); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
    cell("D1R", k, [&](Terms& t, int kk) { psi.d_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.r_right(t, kk); });
    cell("D1D", k, [&](Terms& t, int kk) { psi.d_left(t, kk + 1); },
         [&](Terms& t, int kk) { psi.d_right(t, kk); });
  }
  return lp;
}

// ---------------------------------------------------------------------------
// Certification and export
// ---------------------------------------------------------------------------

namespace {

void note_issue(std::vector<CertificateIssue>* issues, const std::string& name,
                const Rat& violation) {
  if (issues && violation.sign() > 0) issues->push_back({name, violation});
}

Rat worst_of(Rat current, const Rat& candidate) {
  return candidate > current ? candidate : current;
}

std::vector<Rat> basic_table_point(const BasicTable& table) {
  std::vector<Rat> x;
  x.push_back(table.big_gamma());
  for (int k = 1; k <= table.kmax(); ++k) x.push_back(table.dalpha(k));
  for (int k = 1; k <= table.kmax(); ++k) x.push_back(table.dbeta(k));
  return x;
}

std::vector<Rat> hybrid_table_point(const HybridTable& t) {
  std::vector<Rat> x;
  x.push_back(t.big_gamma);
  auto push = [&](const std::vector<Rat>& row) {
    for (int k = 1; k <= t.kmax; ++k) x.push_back(row[static_cast<std::size_t>(k)]);
  };
  push(t.da_l_r);
  push(t.da_r_r);
  push(t.da_l_d);
  push(t.da_r_d);
  push(t.db_l_r);
  push(t.db_r_rs);
  push(t.db_r_rl);
  push(t.db_l_d);
  push(t.db_r_d);
  return x;
}

Rat per_row_violations(const LinearProgram& lp, const std::vector<Rat>& x,
                       std::vector<CertificateIssue>* issues) {
  Rat worst(0);
  for (const auto& row : lp.rows) {
    Rat lhs(0);
    for (const auto& [j, c] : row.coeffs)
      lhs += c * x[static_cast<std::size_t>(j)];
    Rat violation(0);
    switch (row.sense) {
      case Sense::kLe: violation = lhs - row.rhs; break;
      case Sense::kGe: violation = row.rhs - lhs; break;
      case Sense::kEq: violation = abs(lhs - row.rhs); break;
    }
    if (violation.sign() > 0) {
      note_issue(issues, row.name, violation);
      worst = worst_of(worst, violation);
    }
  }
  return worst;
}

}  // namespace

Rat certify_basic_table(const BasicTable& table, int kcheck,
                        std::vector<CertificateIssue>* issues) {
  if (!table.infinite()) {
    LinearProgram lp = build_basic_lp(table.gamma(), table.kmax());
    return per_row_violations(lp, basic_table_point(table), issues);
  }
  // Infinite closed form: per-k families up to kcheck, tails in closed form.
  Rat worst(0);
  const Rat gamma_target = table.big_gamma();
  for (int k = 0; k <= kcheck; ++k) {
    Rat lhs = table.alpha_prefix(k) + Rat(2) * table.dbeta(k + 1);
    worst = worst_of(worst, gamma_target - lhs);
    note_issue(issues, "not_to_a_k" + std::to_string(k), gamma_target - lhs);
  }
  for (int k = 1; k <= kcheck; ++k) {
    Rat lhs = table.dbeta(k) - table.dbeta_tail(k + 1);
    worst = worst_of(worst, -lhs);
    note_issue(issues, "rand_vs_det_k" + std::to_string(k), -lhs);
  }
  for (int k = 1; k <= kcheck; ++k) {
    Rat lhs = table.alpha_prefix(k) + table.dbeta_tail(k);
    worst = worst_of(worst, gamma_target - lhs);
    note_issue(issues, "half_to_a_k" + std::to_string(k), gamma_target - lhs);
  }
  {
    Rat lhs = table.alpha_total();
    worst = worst_of(worst, gamma_target - lhs);
    note_issue(issues, "bound_at_limit", gamma_target - lhs);
  }
  for (int k = 1; k <= kcheck; ++k) {
    Rat d = table.dbeta(k) - table.dbeta(k + 1);
    worst = worst_of(worst, -d);
    note_issue(issues, "mono_k" + std::to_string(k), -d);
    worst = worst_of(worst, -table.dalpha(k));
    worst = worst_of(worst, -table.dbeta(k));
    Rat eq = abs(table.dalpha(k) + table.dbeta(k) - table.dx(k));
    worst = worst_of(worst, eq);
    note_issue(issues, "def_x" + std::to_string(k), eq);
  }
  return worst;
}

Rat closed_form_equality_residual(const BasicTable& table, int kcheck) {
  Rat worst(0);
  for (int k = 0; k <= kcheck; ++k) {
    Rat lhs = table.alpha_prefix(k) + Rat(2) * table.dbeta(k + 1);
    worst = worst_of(worst, abs(lhs - table.big_gamma()));
  }
  worst = worst_of(worst, abs(table.alpha_total() - table.big_gamma()));
  return worst;
}

Rat certify_hybrid_table(const HybridTable& table,
                         std::vector<CertificateIssue>* issues) {
  LinearProgram lp = build_hybrid_lp(table.gamma, table.kmax);
  return per_row_violations(lp, hybrid_table_point(table), issues);
}

BasicTable export_basic_table(const Rat& gamma, int kmax,
                              const LpSolution& solution) {
  std::vector<Rat> da(static_cast<std::size_t>(kmax) + 1, Rat(0));
  std::vector<Rat> db(static_cast<std::size_t>(kmax) + 1, Rat(0));
  BasicTable closed = BasicTable::closed_form(gamma);
  for (int k = 1; k <= kmax; ++k) {
    da[static_cast<std::size_t>(k)] = solution.values[static_cast<std::size_t>(k)];
    db[static_cast<std::size_t>(k)] =
        closed.dx(k) - da[static_cast<std::size_t>(k)];
  }
  // Re-derive Gamma exactly from the exported rows, never above the solver's.
  Rat best = solution.objective;
  auto cap = [&](const Rat& bound) {
    if (bound < best) best = bound;
  };
  std::vector<Rat> prefix(static_cast<std::size_t>(kmax) + 1, Rat(0));
  for (int k = 1; k <= kmax; ++k)
    prefix[static_cast<std::size_t>(k)] =
        prefix[static_cast<std::size_t>(k - 1)] + da[static_cast<std::size_t>(k)];
  std::vector<Rat> suffix(static_cast<std::size_t>(kmax) + 2, Rat(0));
  for (int k = kmax; k >= 1; --k)
    suffix[static_cast<std::size_t>(k)] =
        suffix[static_cast<std::size_t>(k + 1)] + db[static_cast<std::size_t>(k)];
  for (int k = 0; k <= kmax; ++k)
    cap(prefix[static_cast<std::size_t>(k)] +
        (k + 1 <= kmax ? Rat(2) * db[static_cast<std::size_t>(k + 1)] : Rat(0)));
  for (int k = 1; k <= kmax; ++k)
    cap(prefix[static_cast<std::size_t>(k)] + suffix[static_cast<std::size_t>(k)]);
  cap(prefix[static_cast<std::size_t>(kmax)]);

  BasicTable table = BasicTable::from_rows(gamma, kmax, best, std::move(da),
                                           std::move(db));
  std::vector<CertificateIssue> issues;
  Rat violation = certify_basic_table(table, kmax, &issues);
  if (violation.sign() > 0)
    throw std::runtime_error("basic table re-certification failed: " +
                             issues.front().constraint);
  return table;
}

HybridTable export_hybrid_table(const Rat& gamma, int kmax,
                                const LpSolution& solution) {
  HybridTable t;
  t.gamma = gamma;
  t.kmax = kmax;
  auto row = [&](int block) {
    std::vector<Rat> r(static_cast<std::size_t>(kmax) + 1, Rat(0));
    for (int k = 1; k <= kmax; ++k)
      r[static_cast<std::size_t>(k)] =
          solution.values[static_cast<std::size_t>(1 + block * kmax + (k - 1))];
    return r;
  };
  t.da_l_r = row(0);
  t.da_r_r = row(1);
  t.da_l_d = row(2);
  t.da_r_d = row(3);
  // Beta rows recomputed exactly from the alpha rows.
  auto beta = [&](const std::vector<Rat>& alpha, auto dx) {
    std::vector<Rat> r(static_cast<std::size_t>(kmax) + 1, Rat(0));
    for (int k = 1; k <= kmax; ++k)
      r[static_cast<std::size_t>(k)] = dx(k) - alpha[static_cast<std::size_t>(k)];
    return r;
  };
  t.db_l_r = beta(t.da_l_r, [&](int k) { return HybridTable::dx_left_semi(k); });
  t.db_r_rs = beta(t.da_r_r, [&](int k) {
    return HybridTable::dx_right_semi_small(gamma, k);
  });
  t.db_r_rl = beta(t.da_r_r, [&](int k) {
    return HybridTable::dx_right_semi_large(gamma, k);
  });
  t.db_l_d = beta(t.da_l_d, [&](int k) { return HybridTable::dx_left_det(k); });
  t.db_r_d = beta(t.da_r_d, [&](int k) { return HybridTable::dx_right_det(gamma, k); });

  // Gamma from the exported rows: evaluate every Gamma-bearing >= row of the
  // LP at Gamma = 0 and divide by its Gamma coefficient.
  t.big_gamma = solution.objective;
  {
    HybridTable probe = t;
    probe.big_gamma = Rat(0);
    LinearProgram lp = build_hybrid_lp(gamma, kmax);
    std::vector<Rat> x = hybrid_table_point(probe);
    for (const auto& lprow : lp.rows) {
      Rat gcoef(0);
      Rat rest(0);
      for (const auto& [j, c] : lprow.coeffs) {
        if (j == 0)
          gcoef = c;
        else
          rest += c * x[static_cast<std::size_t>(j)];
      }
      if (gcoef.sign() >= 0 || lprow.sense != Sense::kGe) continue;
      // rest + gcoef * Gamma >= rhs  =>  Gamma <= (rest - rhs) / -gcoef
      Rat bound = (rest - lprow.rhs) / (-gcoef);
      if (bound < t.big_gamma) t.big_gamma = bound;
    }
  }

  std::vector<CertificateIssue> issues;
  Rat violation = certify_hybrid_table(t, &issues);
  if (violation.sign() > 0)
    throw std::runtime_error("hybrid table re-certification failed: " +
                             issues.front().constraint);
  return t;
}

}  // namespace adwords
