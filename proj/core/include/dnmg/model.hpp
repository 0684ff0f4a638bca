#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dnmg::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, eq, ge };

enum class Status { optimal, infeasible, unbounded, limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::limit: return "limit";
  }
  return "?";
}

// All solver tolerances live here; nothing is hard-coded in the kernels.
struct Tolerances {
  double feas = 1e-9;        // primal feasibility
  double dual = 1e-9;        // dual feasibility / pricing
  double integrality = 1e-6; // binary rounding
  double mip_gap_abs = 1e-6; // absolute optimality gap for branch & bound
  long max_iterations = 0;   // 0 = automatic (20*(m+n) + 10000)
  long max_nodes = 200000;
};

// Solver-neutral LP/MILP container. Rows are built incrementally; each row
// carries a unique tag so duals can be mapped back to the constraint that
// produced them. Rows may also declare parametric right-hand-side terms
// (rhs = rhs0 + sum coef * master_key), which is how subproblems expose the
// coupling matrix used for cut assembly.
class Model {
 public:
  struct Var {
    std::string name;
    double lo = 0.0, hi = kInf;
    double obj = 0.0;
    bool integer = false;
  };
  struct RhsParam {
    std::string key;
    double coef = 0.0;
  };
  struct Row {
    std::string tag;
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::vector<std::pair<int, double>> terms;  // (var, coef)
    std::vector<RhsParam> rhs_params;
  };

  int add_var(std::string name, double lo, double hi, bool integer = false);
  int add_row(std::string tag, Sense sense, double rhs);

  void add_term(int row, int var, double coef);
  void add_obj(int var, double coef) { vars_[var].obj += coef; }
  void set_bounds(int var, double lo, double hi) {
    vars_[var].lo = lo;
    vars_[var].hi = hi;
  }
  void set_rhs(int row, double rhs) { rows_[row].rhs = rhs; }
  void add_rhs_param(int row, std::string_view key, double coef);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Var& var(int j) const { return vars_[j]; }
  const Row& row(int i) const { return rows_[i]; }
  const std::vector<Var>& vars() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }

  int find_var(std::string_view name) const;  // -1 when absent
  int find_row(std::string_view tag) const;

  bool has_integers() const;

  // Throws std::invalid_argument on inconsistent bounds, dangling variable
  // references, or duplicate row tags.
  void validate() const;

 private:
  std::vector<Var> vars_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

struct Solution {
  Status status = Status::limit;
  double objective = 0.0;
  std::vector<double> x;             // per variable
  std::vector<double> row_dual;      // per row (min convention: <= rows have y <= 0)
  std::vector<double> reduced_cost;  // per variable
  std::vector<int> basis;            // internal column index basic in each row
  std::vector<signed char> col_state;  // opaque warm-start data (bound status)
  long iterations = 0;
  long nodes = 0;
};

// Writes the model in the LP text format (debugging aid for cross-checks
// against external solvers).
void write_lp_format(const Model& m, std::ostream& os);

}  // namespace dnmg::opt
