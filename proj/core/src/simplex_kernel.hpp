#pragma once

// Internal dense-LU revised simplex kernel shared by the LP and MILP
// front ends. Not installed.

#include <vector>

#include "dnmg/model.hpp"

namespace dnmg::opt::internal {

enum class VStat : signed char { basic = 0, at_lo = 1, at_up = 2, free_zero = 3 };

class SimplexKernel {
 public:
  SimplexKernel(const Model& m, const Tolerances& tol);

  // Structural variable bounds, unscaled. Applied before solve().
  void set_var_bounds(int var, double lo, double hi);
  void reset_var_bounds();  // back to the model's bounds

  // Full solve. When a warm basis (+ optional bound states) is usable,
  // re-optimizes with the dual simplex; otherwise two-phase primal from a
  // slack basis.
  Status solve(const std::vector<int>* warm_basis = nullptr,
               const std::vector<signed char>* warm_state = nullptr);

  double objective() const { return obj_; }
  long iterations() const { return iters_; }

  // Unscaled extraction; vectors sized to the model.
  void extract(Solution& out) const;

  int num_rows() const { return m_; }

 private:
  // --- data layout: columns 0..n-1 structural, n..n+m-1 slacks,
  // artificials appended past n+m during phase 1.
  int m_ = 0;
  int n_ = 0;
  int nslack_end_ = 0;

  std::vector<int> cstart_, crow_;
  std::vector<double> cval_;
  std::vector<double> lo_, hi_;      // scaled, per column
  std::vector<double> lo0_, hi0_;    // scaled copies of the model bounds
  std::vector<double> cost_;         // scaled phase-2 cost
  std::vector<double> b_;            // scaled rhs
  std::vector<double> rscale_, cscale_;

  std::vector<int> art_row_;         // artificial columns
  std::vector<double> art_sign_;

  std::vector<VStat> vstat_;
  std::vector<int> basis_;           // column basic in each row
  std::vector<int> bpos_;            // row of a basic column, else -1
  std::vector<double> xb_;           // basic values
  std::vector<double> xn_;           // resting value per column (bound or 0)

  // factorization of the basis + product-form updates
  std::vector<double> lu_;
  std::vector<int> perm_;
  std::vector<int> rowidx_;
  struct Eta {
    int r;
    double wr;
    std::vector<std::pair<int, double>> w;  // nonzeros of the pivot column
  };
  std::vector<Eta> etas_;
  double eta_growth_ = 1.0;

  Tolerances tol_;
  long max_iters_ = 0;
  long iters_ = 0;
  double obj_ = 0.0;
  bool phase1_ = false;
  bool bland_ = false;
  bool restart_requested_ = false;
  long stall_ = 0;
  double best_obj_ = 0.0;

  std::vector<double> work_, work2_;

  int ncols() const { return static_cast<int>(lo_.size()); }
  double col_value(int j) const { return bpos_[j] >= 0 ? xb_[bpos_[j]] : xn_[j]; }

  template <typename F>
  void for_col(int j, F&& f) const {  // nonzeros of column j
    if (j < n_) {
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) f(crow_[k], cval_[k]);
    } else if (j < nslack_end_) {
      f(j - n_, 1.0);
    } else {
      const int a = j - nslack_end_;
      f(art_row_[a], art_sign_[a]);
    }
  }
  double col_dot(int j, const std::vector<double>& y) const {
    double s = 0.0;
    for_col(j, [&](int r, double v) { s += y[r] * v; });
    return s;
  }

  void compute_scaling(const Model& m);
  Status cold_solve(bool conservative);
  int factorize_step();
  bool factorize();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void recompute_xb();
  bool refactor_and_recompute();
  double cost_of(int j) const {
    if (phase1_) return j >= nslack_end_ ? 1.0 : 0.0;
    return j < static_cast<int>(cost_.size()) ? cost_[j] : 0.0;
  }
  double current_obj() const;
  void add_artificials();
  void drop_artificials();
  Status primal_loop();
  Status dual_loop();
  bool dual_feasible() const;
  void pivot(int q, int r, double entering_value, const std::vector<double>& w);
  void install_slack_basis();
  bool install_basis(const std::vector<int>& cols,
                     const std::vector<signed char>* states);
};

}  // namespace dnmg::opt::internal
