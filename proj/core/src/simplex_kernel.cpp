#include "simplex_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdio>

namespace dnmg::opt::internal {

namespace {
// Round a positive scale factor to the nearest power of two so scaling
// introduces no rounding error.
double pow2_near(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return 1.0;
  int e = 0;
  std::frexp(x, &e);
  return std::ldexp(1.0, e - 1);
}
}  // namespace

SimplexKernel::SimplexKernel(const Model& m, const Tolerances& tol) : tol_(tol) {
  m_ = m.num_rows();
  n_ = m.num_vars();
  nslack_end_ = n_ + m_;

  compute_scaling(m);

  // CSC structural columns (scaled).
  std::vector<int> counts(n_, 0);
  for (const auto& r : m.rows())
    for (const auto& [v, c] : r.terms)
      if (c != 0.0) ++counts[v];
  cstart_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) cstart_[j + 1] = cstart_[j] + counts[j];
  crow_.resize(cstart_[n_]);
  cval_.resize(cstart_[n_]);
  std::vector<int> fill(cstart_.begin(), cstart_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const auto& [v, c] : m.row(i).terms) {
      if (c == 0.0) continue;
      const int k = fill[v]++;
      crow_[k] = i;
      cval_[k] = c * rscale_[i] * cscale_[v];
    }
  }

  lo_.assign(nslack_end_, 0.0);
  hi_.assign(nslack_end_, 0.0);
  cost_.assign(nslack_end_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const auto& v = m.var(j);
    lo_[j] = v.lo == -kInf ? -kInf : v.lo / cscale_[j];
    hi_[j] = v.hi == kInf ? kInf : v.hi / cscale_[j];
    cost_[j] = v.obj * cscale_[j];
  }
  b_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const auto& r = m.row(i);
    b_[i] = r.rhs * rscale_[i];
    const int s = n_ + i;
    switch (r.sense) {
      case Sense::le:
        lo_[s] = 0.0;
        hi_[s] = kInf;
        break;
      case Sense::eq:
        lo_[s] = 0.0;
        hi_[s] = 0.0;
        break;
      case Sense::ge:
        lo_[s] = -kInf;
        hi_[s] = 0.0;
        break;
    }
  }
  lo0_ = lo_;
  hi0_ = hi_;

  max_iters_ = tol_.max_iterations > 0 ? tol_.max_iterations
                                       : 20L * (m_ + nslack_end_) + 10000L;
  work_.resize(m_);
  work2_.resize(m_);
}

void SimplexKernel::compute_scaling(const Model& m) {
  rscale_.assign(m_, 1.0);
  cscale_.assign(n_, 1.0);
  for (int pass = 0; pass < 3; ++pass) {
    // rows
    for (int i = 0; i < m_; ++i) {
      double mx = 0.0, mn = kInf;
      for (const auto& [v, c] : m.row(i).terms) {
        if (c == 0.0) continue;
        const double a = std::abs(c) * rscale_[i] * cscale_[v];
        mx = std::max(mx, a);
        mn = std::min(mn, a);
      }
      if (mx > 0.0) rscale_[i] *= pow2_near(1.0 / std::sqrt(mx * mn));
    }
    // columns
    std::vector<double> cmx(n_, 0.0), cmn(n_, kInf);
    for (int i = 0; i < m_; ++i) {
      for (const auto& [v, c] : m.row(i).terms) {
        if (c == 0.0) continue;
        const double a = std::abs(c) * rscale_[i] * cscale_[v];
        cmx[v] = std::max(cmx[v], a);
        cmn[v] = std::min(cmn[v], a);
      }
    }
    for (int j = 0; j < n_; ++j)
      if (cmx[j] > 0.0) cscale_[j] *= pow2_near(1.0 / std::sqrt(cmx[j] * cmn[j]));
  }
}

void SimplexKernel::set_var_bounds(int var, double lo, double hi) {
  lo_[var] = lo == -kInf ? -kInf : lo / cscale_[var];
  hi_[var] = hi == kInf ? kInf : hi / cscale_[var];
}

void SimplexKernel::reset_var_bounds() {
  lo_ = lo0_;
  hi_ = hi0_;
}

int SimplexKernel::factorize_step() {
  etas_.clear();
  eta_growth_ = 1.0;
  lu_.assign(static_cast<size_t>(m_) * m_, 0.0);
  perm_.resize(m_);
  rowidx_.resize(m_);
  for (int i = 0; i < m_; ++i) rowidx_[i] = i;
  // dense B from basis columns
  for (int r = 0; r < m_; ++r) {
    const int j = basis_[r];
    for_col(j, [&](int row, double v) { lu_[static_cast<size_t>(row) * m_ + r] = v; });
  }
  for (int k = 0; k < m_; ++k) {
    int p = k;
    double best = std::abs(lu_[static_cast<size_t>(k) * m_ + k]);
    for (int i = k + 1; i < m_; ++i) {
      const double a = std::abs(lu_[static_cast<size_t>(i) * m_ + k]);
      if (a > best) {
        best = a;
        p = i;
      }
    }
    if (best < 1e-11) return k;  // column k is (numerically) dependent
    perm_[k] = p;
    if (p != k) {
      std::swap(rowidx_[k], rowidx_[p]);
      for (int j = 0; j < m_; ++j)
        std::swap(lu_[static_cast<size_t>(k) * m_ + j], lu_[static_cast<size_t>(p) * m_ + j]);
    }
    const double piv = lu_[static_cast<size_t>(k) * m_ + k];
    for (int i = k + 1; i < m_; ++i) {
      double& l = lu_[static_cast<size_t>(i) * m_ + k];
      if (l == 0.0) continue;
      l /= piv;
      const double li = l;
      const double* uk = &lu_[static_cast<size_t>(k) * m_];
      double* ui = &lu_[static_cast<size_t>(i) * m_];
      for (int j = k + 1; j < m_; ++j) ui[j] -= li * uk[j];
    }
  }
  return -1;
}

// Repairs numerically dependent basis columns by ejecting them in favor of a
// nonbasic slack, then refactorizes. Ejected columns are banned from
// re-entering during the repair so the loop makes strict progress.
bool SimplexKernel::factorize() {
  std::vector<char> banned;
  for (int tries = 0; tries < 40; ++tries) {
    const int k = factorize_step();
    if (k < 0) return true;
#ifdef DNMG_KERNEL_DEBUG
    std::fprintf(stderr, "[kernel]   repair try %d: dependent at step %d (col %d, rowidx %d)\n",
                 tries, k, basis_[k], rowidx_[k]);
#endif
    if (banned.empty()) banned.assign(ncols(), 0);
    // eject the dependent column at basis position k
    const int jout = basis_[k];
    bpos_[jout] = -1;
    banned[jout] = 1;
    if (lo_[jout] != -kInf) {
      vstat_[jout] = VStat::at_lo;
      xn_[jout] = lo_[jout];
    } else if (hi_[jout] != kInf) {
      vstat_[jout] = VStat::at_up;
      xn_[jout] = hi_[jout];
    } else {
      vstat_[jout] = VStat::free_zero;
      xn_[jout] = 0.0;
    }
    // bring in a slack covering one of the rows the elimination never
    // reached (original rows at permuted positions k..m-1)
    int jin = -1;
    for (int rr = k; rr < m_ && jin < 0; ++rr) {
      const int cand = n_ + rowidx_[rr];
      if (bpos_[cand] < 0 && !banned[cand]) jin = cand;
    }
    for (int r = 0; r < m_ && jin < 0; ++r)
      if (bpos_[n_ + r] < 0 && !banned[n_ + r]) jin = n_ + r;
    if (jin < 0) return false;
    basis_[k] = jin;
    bpos_[jin] = k;
    vstat_[jin] = VStat::basic;
  }
  return false;
}

void SimplexKernel::ftran(std::vector<double>& v) const {
  // B w = v  with PB = LU :  apply P, solve L, solve U, then etas.
  for (int k = 0; k < m_; ++k)
    if (perm_[k] != k) std::swap(v[k], v[perm_[k]]);
  for (int i = 1; i < m_; ++i) {
    double s = v[i];
    const double* li = &lu_[static_cast<size_t>(i) * m_];
    for (int j = 0; j < i; ++j) s -= li[j] * v[j];
    v[i] = s;
  }
  for (int i = m_ - 1; i >= 0; --i) {
    double s = v[i];
    const double* ui = &lu_[static_cast<size_t>(i) * m_];
    for (int j = i + 1; j < m_; ++j) s -= ui[j] * v[j];
    v[i] = s / ui[i];
  }
  for (const auto& e : etas_) {
    const double t = v[e.r] / e.wr;
    if (t != 0.0) {
      for (const auto& [i, wi] : e.w) v[i] -= wi * t;
    }
    v[e.r] = t;
  }
}

void SimplexKernel::btran(std::vector<double>& v) const {
  // y^T B = v^T : apply eta transposes in reverse, then solve with LU^T.
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->r] * it->wr;
    for (const auto& [i, wi] : it->w) s += v[i] * wi;
    // s = w . v  (w includes wr at r via the two parts)
    v[it->r] = v[it->r] - (s - v[it->r]) / it->wr;
  }
  // U^T z = v (forward), L^T t = z (backward), y = P^T t.
  for (int i = 0; i < m_; ++i) {
    double s = v[i];
    for (int k = 0; k < i; ++k) s -= lu_[static_cast<size_t>(k) * m_ + i] * v[k];
    v[i] = s / lu_[static_cast<size_t>(i) * m_ + i];
  }
  for (int i = m_ - 2; i >= 0; --i) {
    double s = v[i];
    for (int k = i + 1; k < m_; ++k) s -= lu_[static_cast<size_t>(k) * m_ + i] * v[k];
    v[i] = s;
  }
  for (int k = m_ - 1; k >= 0; --k)
    if (perm_[k] != k) std::swap(v[k], v[perm_[k]]);
}

void SimplexKernel::recompute_xb() {
  std::vector<double>& rhs = work_;
  rhs.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) rhs[i] = b_[i];
  for (int j = 0; j < ncols(); ++j) {
    if (bpos_[j] >= 0) continue;
    const double xj = xn_[j];
    if (xj == 0.0) continue;
    for_col(j, [&](int r, double v) { rhs[r] -= v * xj; });
  }
  ftran(rhs);
  xb_ = rhs;
}

bool SimplexKernel::refactor_and_recompute() {
  eta_growth_ = 1.0;
  if (!factorize()) {
    // numerically singular basis: ask the driver for a clean restart
#ifdef DNMG_KERNEL_DEBUG
    std::fprintf(stderr, "[kernel] singular refactor at iter %ld (etas were consumed)\n", iters_);
#endif
    restart_requested_ = true;
    return false;
  }
  recompute_xb();
  return true;
}

double SimplexKernel::current_obj() const {
  double z = 0.0;
  for (int j = 0; j < ncols(); ++j) {
    const double c = cost_of(j);
    if (c != 0.0) z += c * col_value(j);
  }
  return z;
}

void SimplexKernel::install_slack_basis() {
  basis_.resize(m_);
  bpos_.assign(ncols(), -1);
  vstat_.assign(ncols(), VStat::at_lo);
  xn_.assign(ncols(), 0.0);
  for (int j = 0; j < ncols(); ++j) {
    if (lo_[j] != -kInf) {
      vstat_[j] = VStat::at_lo;
      xn_[j] = lo_[j];
    } else if (hi_[j] != kInf) {
      vstat_[j] = VStat::at_up;
      xn_[j] = hi_[j];
    } else {
      vstat_[j] = VStat::free_zero;
      xn_[j] = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i;
    basis_[i] = s;
    bpos_[s] = i;
    vstat_[s] = VStat::basic;
  }
}

bool SimplexKernel::install_basis(const std::vector<int>& cols,
                                  const std::vector<signed char>* states) {
  if (static_cast<int>(cols.size()) != m_) return false;
  if (states && static_cast<int>(states->size()) != nslack_end_) states = nullptr;
  std::vector<char> used(ncols(), 0);
  for (int c : cols) {
    if (c < 0 || c >= nslack_end_ || used[c]) return false;
    used[c] = 1;
  }
  basis_ = cols;
  bpos_.assign(ncols(), -1);
  vstat_.assign(ncols(), VStat::at_lo);
  xn_.assign(ncols(), 0.0);
  for (int j = 0; j < ncols(); ++j) {
    if (used[j]) continue;
    VStat st = VStat::at_lo;
    if (states && j < nslack_end_)
      st = static_cast<VStat>((*states)[j]);
    // repair inconsistent or stale states against the current bounds
    if (st == VStat::basic) st = VStat::at_lo;
    if (st == VStat::at_lo && lo_[j] == -kInf)
      st = hi_[j] != kInf ? VStat::at_up : VStat::free_zero;
    if (st == VStat::at_up && hi_[j] == kInf)
      st = lo_[j] != -kInf ? VStat::at_lo : VStat::free_zero;
    if (st == VStat::free_zero && lo_[j] == hi_[j] && lo_[j] != -kInf)
      st = VStat::at_lo;
    if (!states) {
      if (lo_[j] != -kInf)
        st = VStat::at_lo;
      else if (hi_[j] != kInf)
        st = VStat::at_up;
      else
        st = VStat::free_zero;
    }
    vstat_[j] = st;
    xn_[j] = st == VStat::at_lo ? lo_[j] : (st == VStat::at_up ? hi_[j] : 0.0);
  }
  for (int i = 0; i < m_; ++i) {
    bpos_[basis_[i]] = i;
    vstat_[basis_[i]] = VStat::basic;
  }
  return factorize();
}

void SimplexKernel::add_artificials() {
  // Appends; stale artificials from an earlier repair round stay pinned at 0.
  const double ftol = tol_.feas;
  for (int i = 0; i < m_; ++i) {
    const int s = basis_[i];
    double target = xb_[i];
    double clamped = target;
    if (clamped < lo_[s]) clamped = lo_[s];
    if (clamped > hi_[s]) clamped = hi_[s];
    const double viol = target - clamped;
    if (std::abs(viol) <= ftol) continue;
    // Slack leaves the basis at its nearest bound; an artificial carries the
    // residual with +1 value.
    const int a = static_cast<int>(lo_.size());
    art_row_.push_back(i);
    art_sign_.push_back(viol > 0 ? 1.0 : -1.0);
    lo_.push_back(0.0);
    hi_.push_back(kInf);
    if (static_cast<int>(cost_.size()) < a + 1) cost_.resize(a + 1, 0.0);
    vstat_.push_back(VStat::basic);
    xn_.push_back(0.0);
    bpos_.push_back(i);
    basis_[i] = a;
    bpos_[s] = -1;
    vstat_[s] = clamped == lo_[s] ? VStat::at_lo : VStat::at_up;
    xn_[s] = clamped;
    xb_[i] = std::abs(viol);
  }
  // artificial columns change B into a signed identity on those rows;
  // refactorize so ftran/btran stay exact.
  factorize();
  recompute_xb();
}

void SimplexKernel::drop_artificials() {
  // Pin artificials at zero; basic ones may linger at value ~0.
  for (size_t a = 0; a < art_row_.size(); ++a) {
    const int j = nslack_end_ + static_cast<int>(a);
    lo_[j] = 0.0;
    hi_[j] = 0.0;
    if (bpos_[j] < 0) {
      vstat_[j] = VStat::at_lo;
      xn_[j] = 0.0;
    }
  }
}

Status SimplexKernel::solve(const std::vector<int>* warm_basis,
                            const std::vector<signed char>* warm_state) {
  iters_ = 0;
  bland_ = false;
  stall_ = 0;

  if (m_ == 0) {
    // Pure box problem.
    install_slack_basis();
    for (int j = 0; j < n_; ++j) {
      const double c = cost_[j];
      if (c > 0) {
        if (lo_[j] == -kInf) return Status::unbounded;
        vstat_[j] = VStat::at_lo;
        xn_[j] = lo_[j];
      } else if (c < 0) {
        if (hi_[j] == kInf) return Status::unbounded;
        vstat_[j] = VStat::at_up;
        xn_[j] = hi_[j];
      }
      if (lo_[j] > hi_[j]) return Status::infeasible;
    }
    obj_ = current_obj();
    return Status::optimal;
  }

  for (int j = 0; j < n_; ++j)
    if (lo_[j] > hi_[j]) return Status::infeasible;

  if (warm_basis && install_basis(*warm_basis, warm_state)) {
    recompute_xb();
    phase1_ = false;
    if (dual_feasible()) {
      const Status st = dual_loop();
#ifdef DNMG_KERNEL_DEBUG
      std::fprintf(stderr, "[kernel] warm dual: st=%d iters=%ld\n", (int)st, iters_);
#endif
      if (st == Status::optimal) {
        // primal cleanup; usually 0 iterations
        const Status st2 = primal_loop();
        if (st2 != Status::limit) {
          obj_ = current_obj();
          return st2;
        }
      } else if (st == Status::infeasible) {
        return st;
      }
      // fall through to a cold solve on limit / numerical trouble
    } else {
#ifdef DNMG_KERNEL_DEBUG
      std::fprintf(stderr, "[kernel] warm basis not dual feasible\n");
#endif
    }
    // basis primal state may still be feasible: try primal directly
    bool primal_ok = true;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (xb_[i] < lo_[j] - tol_.feas * 10 || xb_[i] > hi_[j] + tol_.feas * 10) {
        primal_ok = false;
        break;
      }
    }
    if (primal_ok) {
      phase1_ = false;
      const Status st = primal_loop();
      if (st != Status::limit) {
        obj_ = current_obj();
        return st;
      }
    }
  }

  // Cold: slack basis, two-phase primal. A numerically singular basis
  // triggers one clean restart under Bland's rule.
  for (int restart = 0; restart < 2; ++restart) {
    restart_requested_ = false;
    const Status st = cold_solve(restart > 0);
    if (!restart_requested_) return st;
  }
  return Status::limit;
}

Status SimplexKernel::cold_solve(bool conservative) {
  art_row_.clear();
  art_sign_.clear();
  lo_.resize(nslack_end_);
  hi_.resize(nslack_end_);
  cost_.resize(nslack_end_);
  install_slack_basis();
  if (!factorize()) return Status::limit;
  recompute_xb();

  for (int attempt = 0; attempt < 3; ++attempt) {
    if (restart_requested_) {
#ifdef DNMG_KERNEL_DEBUG
      std::fprintf(stderr, "[kernel] cold: restart requested (attempt %d)\n", attempt);
#endif
      return Status::limit;
    }
    bland_ = conservative;
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (xb_[i] < lo_[j] - tol_.feas || xb_[i] > hi_[j] + tol_.feas) {
        need_phase1 = true;
        break;
      }
    }
    if (need_phase1) {
      add_artificials();
      phase1_ = true;
      bland_ = conservative;
      stall_ = 0;
      const Status st1 = primal_loop();
      if (st1 == Status::limit) {
#ifdef DNMG_KERNEL_DEBUG
        std::fprintf(stderr, "[kernel] cold: phase1 limit at iter %ld restart=%d\n",
                     iters_, (int)restart_requested_);
#endif
        return st1;
      }
      double infeas = 0.0;
      for (int j = nslack_end_; j < ncols(); ++j) infeas += col_value(j);
      if (infeas > tol_.feas * 100.0) {
#ifdef DNMG_KERNEL_DEBUG
        std::fprintf(stderr, "[kernel] phase1 infeasible: residual=%g\n", infeas);
#endif
        phase1_ = false;
        return Status::infeasible;
      }
      drop_artificials();
      phase1_ = false;
    }
    bland_ = conservative;
    stall_ = 0;
    const Status st = primal_loop();
    if (st != Status::optimal) {
#ifdef DNMG_KERNEL_DEBUG
      std::fprintf(stderr, "[kernel] cold: phase2 returned %d at iter %ld restart=%d\n",
                   (int)st, iters_, (int)restart_requested_);
#endif
      return st;
    }
    if (!refactor_and_recompute()) return Status::limit;
    bool clean = true;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (xb_[i] < lo_[j] - tol_.feas * 10 || xb_[i] > hi_[j] + tol_.feas * 10) {
        clean = false;
        break;
      }
    }
    if (clean) {
      obj_ = current_obj();
      return Status::optimal;
    }
#ifdef DNMG_KERNEL_DEBUG
    {
      double worst = 0; int wj = -1;
      for (int i = 0; i < m_; ++i) {
        const int j = basis_[i];
        const double v = std::max(lo_[j] - xb_[i], xb_[i] - hi_[j]);
        if (v > worst) { worst = v; wj = j; }
      }
      std::fprintf(stderr, "[kernel] repair %d: worst violation %g on col %d (lo=%g hi=%g val=%g)\n",
                   attempt, worst, wj, wj>=0?lo_[wj]:0, wj>=0?hi_[wj]:0, wj>=0?xb_[bpos_[wj]]:0);
    }
#endif
  }
  return Status::limit;
}

bool SimplexKernel::dual_feasible() const {
  std::vector<double> y(m_, 0.0);
  for (int i = 0; i < m_; ++i) y[i] = cost_of(basis_[i]);
  btran(y);
  const double dtol = tol_.dual * 100.0;
  for (int j = 0; j < ncols(); ++j) {
    if (bpos_[j] >= 0 || lo_[j] == hi_[j]) continue;
    const double d = cost_of(j) - col_dot(j, y);
    switch (vstat_[j]) {
      case VStat::at_lo:
        if (d < -dtol) return false;
        break;
      case VStat::at_up:
        if (d > dtol) return false;
        break;
      case VStat::free_zero:
        if (std::abs(d) > dtol) return false;
        break;
      default: break;
    }
  }
  return true;
}

Status SimplexKernel::primal_loop() {
  std::vector<double> y(m_), w(m_);
  std::vector<char> shunned(ncols(), 0);  // entering columns with no safe pivot
  best_obj_ = kInf;
  for (;;) {
    if (++iters_ > max_iters_) return Status::limit;
    if (restart_requested_) return Status::limit;
#ifdef DNMG_KERNEL_PARANOID
    if (!etas_.empty() && !refactor_and_recompute()) return Status::limit;
#else
    if ((static_cast<long>(etas_.size()) >= 48 || eta_growth_ > 1e9) &&
        !refactor_and_recompute())
      return Status::limit;
#endif

    // pricing
    for (int i = 0; i < m_; ++i) y[i] = cost_of(basis_[i]);
    btran(y);
    int q = -1;
    double best = 0.0;
    double dq = 0.0;
    bool only_shunned = false;
    const double dtol = tol_.dual;
    for (int pass = 0; pass < 2 && q < 0; ++pass) {
      // second pass considers previously shunned columns as a last resort
      for (int j = 0; j < ncols(); ++j) {
        if (bpos_[j] >= 0 || lo_[j] == hi_[j]) continue;
        if ((pass == 0) == static_cast<bool>(shunned[j])) continue;
        const double d = cost_of(j) - col_dot(j, y);
        double score = 0.0;
        switch (vstat_[j]) {
          case VStat::at_lo:
            if (d < -dtol) score = -d;
            break;
          case VStat::at_up:
            if (d > dtol) score = d;
            break;
          case VStat::free_zero:
            if (std::abs(d) > dtol) score = std::abs(d);
            break;
          default: break;
        }
        if (score > 0.0) {
          if (bland_) {
            q = j;
            dq = d;
            break;
          }
          if (score > best + 1e-15) {
            best = score;
            q = j;
            dq = d;
          }
        }
      }
      only_shunned = pass == 1 && q >= 0;
    }
    if (q < 0) return Status::optimal;

    const int dir = (vstat_[q] == VStat::at_up || (vstat_[q] == VStat::free_zero && dq > 0)) ? -1 : 1;

    for (int i = 0; i < m_; ++i) w[i] = 0.0;
    for_col(q, [&](int r, double v) { w[r] = v; });
    ftran(w);

    // ratio test: entering moves by dir * t, basics move at rate -dir * w.
    const double ptol = 1e-9;
    const double flip_t =
        (lo_[q] != -kInf && hi_[q] != kInf) ? hi_[q] - lo_[q] : kInf;
    int leave = -1;        // basis row; -1 = bound flip of entering
    double leave_to = 0.0; // bound the leaving variable lands on
    double tmax = flip_t;

    auto blocker = [&](int i, double& ti, double& to) {
      const double rate = -dir * w[i];
      const int jb = basis_[i];
      if (rate < -ptol) {
        if (lo_[jb] == -kInf) return false;
        ti = std::max((xb_[i] - lo_[jb]) / (-rate), 0.0);
        to = lo_[jb];
        return true;
      }
      if (rate > ptol) {
        if (hi_[jb] == kInf) return false;
        ti = std::max((hi_[jb] - xb_[i]) / rate, 0.0);
        to = hi_[jb];
        return true;
      }
      return false;
    };

    if (bland_) {
      // exact minimum ratio, lowest variable index among the blockers
      for (int i = 0; i < m_; ++i) {
        double ti, to;
        if (!blocker(i, ti, to)) continue;
        if (ti < tmax - 1e-12 ||
            (ti < tmax + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
          tmax = std::min(tmax, ti);
          leave = i;
          leave_to = to;
        }
      }
    } else {
      // two-pass Harris: allow feas_tol slippage, then take the largest pivot
      double theta = flip_t;
      for (int i = 0; i < m_; ++i) {
        const double rate = -dir * w[i];
        const int jb = basis_[i];
        if (rate < -ptol && lo_[jb] != -kInf)
          theta = std::min(theta, std::max((xb_[i] - lo_[jb] + tol_.feas) / (-rate), 0.0));
        else if (rate > ptol && hi_[jb] != kInf)
          theta = std::min(theta, std::max((hi_[jb] - xb_[i] + tol_.feas) / rate, 0.0));
      }
      double best_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        double ti, to;
        if (!blocker(i, ti, to)) continue;
        if (ti > theta + 1e-12) continue;
        const double piv = std::abs(w[i]);
        if (leave < 0 || piv > best_piv + 1e-12 ||
            (std::abs(piv - best_piv) <= 1e-12 && basis_[i] < basis_[leave])) {
          leave = i;
          leave_to = to;
          best_piv = piv;
          tmax = ti;
        }
      }
      if (leave >= 0 && flip_t < tmax) leave = -1;  // entering flips first
      if (leave < 0) tmax = flip_t;
    }

    if (tmax == kInf) {
#ifdef DNMG_KERNEL_DEBUG
      std::fprintf(stderr, "[kernel] ray: phase1=%d iter=%ld q=%d dir=%d dq=%g bland=%d\n",
                   (int)phase1_, iters_, q, dir, dq, (int)bland_);
#endif
      return phase1_ ? Status::limit : Status::unbounded;
    }

    // stall detection -> Bland's rule
    const double z = current_obj();
    if (z < best_obj_ - 1e-12 * (1.0 + std::abs(best_obj_))) {
      best_obj_ = z;
      stall_ = 0;
    } else if (++stall_ > 300) {
      bland_ = true;
    }

    if (leave < 0) {
      // bound flip
      const double t = tmax;
      for (int i = 0; i < m_; ++i) xb_[i] -= dir * t * w[i];
      vstat_[q] = vstat_[q] == VStat::at_lo ? VStat::at_up : VStat::at_lo;
      xn_[q] = vstat_[q] == VStat::at_lo ? lo_[q] : hi_[q];
      std::fill(shunned.begin(), shunned.end(), 0);
      continue;
    }

    // a tiny pivot relative to the column norm would poison the basis:
    // try fresh numbers first, then shun the entering column entirely and
    // reprice (unless every improving column is already shunned)
    {
      double wmax = 0.0;
      for (int i = 0; i < m_; ++i) wmax = std::max(wmax, std::abs(w[i]));
      if (std::abs(w[leave]) < 1e-6 * wmax && !only_shunned) {
        if (!etas_.empty()) {
          if (!refactor_and_recompute()) return Status::limit;
          continue;
        }
        shunned[q] = 1;
        continue;
      }
    }

    const double enter_val = col_value(q) + dir * tmax;
    const int jl = basis_[leave];
    for (int i = 0; i < m_; ++i)
      if (i != leave) xb_[i] -= dir * tmax * w[i];
    pivot(q, leave, enter_val, w);
    vstat_[jl] = leave_to == lo_[jl] ? VStat::at_lo : VStat::at_up;
    xn_[jl] = leave_to;
    std::fill(shunned.begin(), shunned.end(), 0);
  }
}

void SimplexKernel::pivot(int q, int r, double entering_value,
                          const std::vector<double>& w) {
  Eta e;
  e.r = r;
  e.wr = w[r];
  double wmax = std::abs(w[r]);
  for (int i = 0; i < m_; ++i)
    if (i != r && w[i] != 0.0) {
      e.w.emplace_back(i, w[i]);
      wmax = std::max(wmax, std::abs(w[i]));
    }
  eta_growth_ *= std::max(1.0, wmax / std::max(std::abs(w[r]), 1e-300));
  etas_.push_back(std::move(e));

  const int jl = basis_[r];
  bpos_[jl] = -1;
  basis_[r] = q;
  bpos_[q] = r;
  vstat_[q] = VStat::basic;
  xb_[r] = entering_value;
}

Status SimplexKernel::dual_loop() {
  std::vector<double> rho(m_), w(m_);
  const double ftol = tol_.feas;
  const long budget = 3L * m_ + 500;  // degenerate grinds go back to primal
  long spent = 0;
  for (;;) {
    if (++iters_ > max_iters_) return Status::limit;
    if (++spent > budget) return Status::limit;
    if (restart_requested_) return Status::limit;
    if ((static_cast<long>(etas_.size()) >= 48 || eta_growth_ > 1e9) &&
        !refactor_and_recompute())
      return Status::limit;

    // leaving: most violated basic
    int r = -1;
    double viol = ftol;
    bool below = false;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (xb_[i] < lo_[j] - viol) {
        viol = lo_[j] - xb_[i];
        r = i;
        below = true;
      } else if (xb_[i] > hi_[j] + viol) {
        viol = xb_[i] - hi_[j];
        r = i;
        below = false;
      }
    }
    if (r < 0) return Status::optimal;

    for (int i = 0; i < m_; ++i) rho[i] = 0.0;
    rho[r] = 1.0;
    btran(rho);

    std::vector<double> y(m_);
    for (int i = 0; i < m_; ++i) y[i] = cost_of(basis_[i]);
    btran(y);

    // entering: two-pass dual ratio test (largest pivot within the
    // dual-tolerance window)
    int q = -1;
    double alpha_q = 0.0;
    const double ptol = 1e-9;
    double theta_allow = kInf;
    std::vector<std::pair<int, double>> cands;
    for (int j = 0; j < ncols(); ++j) {
      if (bpos_[j] >= 0 || lo_[j] == hi_[j]) continue;
      const double alpha = col_dot(j, rho);
      if (std::abs(alpha) <= ptol) continue;
      bool ok = false;
      if (below) {
        ok = (vstat_[j] == VStat::at_lo && alpha < 0) ||
             (vstat_[j] == VStat::at_up && alpha > 0) ||
             vstat_[j] == VStat::free_zero;
      } else {
        ok = (vstat_[j] == VStat::at_lo && alpha > 0) ||
             (vstat_[j] == VStat::at_up && alpha < 0) ||
             vstat_[j] == VStat::free_zero;
      }
      if (!ok) continue;
      const double d = cost_of(j) - col_dot(j, y);
      cands.emplace_back(j, alpha);
      theta_allow = std::min(theta_allow,
                             (std::abs(d) + tol_.dual) / std::abs(alpha));
    }
    if (cands.empty()) return Status::infeasible;
    for (const auto& [j, alpha] : cands) {
      const double d = cost_of(j) - col_dot(j, y);
      const double t = std::abs(d) / std::abs(alpha);
      if (t > theta_allow + 1e-12) continue;
      if (q < 0 || std::abs(alpha) > std::abs(alpha_q) + 1e-12 ||
          (std::abs(std::abs(alpha) - std::abs(alpha_q)) <= 1e-12 && j < q)) {
        q = j;
        alpha_q = alpha;
      }
    }
    if (q < 0) return Status::infeasible;

    for (int i = 0; i < m_; ++i) w[i] = 0.0;
    for_col(q, [&](int row, double v) { w[row] = v; });
    ftran(w);
    if (std::abs(w[r]) < 1e-10) {
      if (!refactor_and_recompute()) return Status::limit;
      continue;
    }

    const int jl = basis_[r];
    const double target = below ? lo_[jl] : hi_[jl];
    const double delta = (xb_[r] - target) / w[r];
    for (int i = 0; i < m_; ++i)
      if (i != r) xb_[i] -= w[i] * delta;
    const double enter_val = col_value(q) + delta;
    pivot(q, r, enter_val, w);
    vstat_[jl] = below ? VStat::at_lo : VStat::at_up;
    xn_[jl] = target;
  }
}

void SimplexKernel::extract(Solution& out) const {
  out.x.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) out.x[j] = col_value(j) * cscale_[j];

  std::vector<double> y(m_, 0.0);
  for (int i = 0; i < m_; ++i) y[i] = cost_of(basis_[i]);
  btran(y);

  out.row_dual.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) out.row_dual[i] = y[i] * rscale_[i];

  out.reduced_cost.assign(n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const double d = cost_of(j) - col_dot(j, y);
    out.reduced_cost[j] = d / cscale_[j];
  }

  out.basis = basis_;
  out.col_state.assign(nslack_end_, 0);
  for (int j = 0; j < nslack_end_; ++j)
    out.col_state[j] = static_cast<signed char>(vstat_[j]);
  out.iterations = iters_;

  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += cost_[j] * col_value(j);
  out.objective = z;
}

}  // namespace dnmg::opt::internal
