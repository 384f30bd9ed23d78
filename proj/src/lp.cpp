#include "mgbench/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mgbench::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;  // smallest usable ratio-test pivot
constexpr double kLuPivotTol = 1e-11;
constexpr double kDropTol = 1e-13;
constexpr int kEtaLimit = 96;
constexpr int kStallLimit = 600;  // degenerate pivots before switching to Bland

enum class VarStatus : unsigned char { AtLower, AtUpper, Free, Basic };

// Sparse LU of the basis with singleton peeling, Markowitz-style bump
// elimination, and product-form updates between refactorizations.
class BasisLU {
 public:
  // cols[slot] = sparse basis column over original row indices. Returns false
  // on a numerically singular basis.
  bool factor(int m, const std::vector<std::vector<std::pair<int, double>>>& cols) {
    m_ = m;
    etas_.clear();
    perm_row_.assign(m, -1);
    perm_col_.assign(m, -1);
    inv_row_.assign(m, -1);
    inv_col_.assign(m, -1);
    udiag_.assign(m, 0.0);
    lcols_.assign(m, {});
    urows_.assign(m, {});
    step_ = 0;
    if (m == 0) return true;

    ce_ = cols;
    rowlist_.assign(m, {});
    row_active_.assign(m, 1);
    col_active_.assign(m, 1);
    work_.assign(m, 0.0);
    mark_.assign(m, 0);
    col_q_.clear();
    row_q_.clear();
    for (int j = 0; j < m; ++j) {
      auto& col = ce_[j];
      col.erase(std::remove_if(col.begin(), col.end(),
                               [](const auto& e) { return std::abs(e.second) < kDropTol; }),
                col.end());
      for (const auto& [r, v] : col) rowlist_[r].push_back(j);
    }
    for (int j = 0; j < m; ++j)
      if (ce_[j].size() == 1) col_q_.push_back(j);
    for (int i = 0; i < m; ++i)
      if (rowlist_[i].size() == 1) row_q_.push_back(i);

    while (step_ < m) {
      int pi = -1, pj = -1;
      double pv = 0.0;
      // Column singletons: no multipliers, no fill.
      while (!col_q_.empty()) {
        const int j = col_q_.back();
        col_q_.pop_back();
        if (!col_active_[j] || ce_[j].size() != 1) continue;
        pi = ce_[j][0].first;
        pj = j;
        pv = ce_[j][0].second;
        break;
      }
      // Row singletons: no fill either.
      if (pj < 0) {
        while (!row_q_.empty()) {
          const int i = row_q_.back();
          row_q_.pop_back();
          if (!row_active_[i] || rowlist_[i].size() != 1) continue;
          pi = i;
          pj = rowlist_[i][0];
          for (const auto& [r, v] : ce_[pj])
            if (r == pi) pv = v;
          break;
        }
      }
      // Bump: lowest-index column of minimal count; threshold pivoting.
      if (pj < 0) {
        std::size_t best_cnt = std::numeric_limits<std::size_t>::max();
        for (int j = 0; j < m; ++j)
          if (col_active_[j] && !ce_[j].empty() && ce_[j].size() < best_cnt) {
            best_cnt = ce_[j].size();
            pj = j;
          }
        if (pj < 0) return false;  // structurally singular
        double colmax = 0.0;
        for (const auto& [r, v] : ce_[pj]) colmax = std::max(colmax, std::abs(v));
        if (colmax < kLuPivotTol) return false;
        std::size_t best_rc = std::numeric_limits<std::size_t>::max();
        for (const auto& [r, v] : ce_[pj]) {
          if (std::abs(v) < 0.01 * colmax) continue;
          if (rowlist_[r].size() < best_rc || (rowlist_[r].size() == best_rc && r < pi)) {
            best_rc = rowlist_[r].size();
            pi = r;
            pv = v;
          }
        }
      }
      if (pi < 0 || std::abs(pv) < kLuPivotTol) return false;
      eliminate(pi, pj, pv);
    }

    // Translate U rows from column slots to elimination steps.
    for (int k = 0; k < m; ++k)
      for (auto& [idx, v] : urows_[k]) idx = inv_col_[idx];
    return true;
  }

  // b: dense over original rows -> basic values dense over basis slots.
  void ftran(std::vector<double>& b) const {
    y_.assign(m_, 0.0);
    z_.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      const double t = b[perm_row_[k]];
      y_[k] = t;
      if (t != 0.0)
        for (const auto& [r, mult] : lcols_[k]) b[r] -= mult * t;
    }
    for (int k = m_ - 1; k >= 0; --k) {
      double t = y_[k];
      for (const auto& [step, v] : urows_[k]) t -= v * z_[step];
      z_[k] = t / udiag_[k];
    }
    for (int k = 0; k < m_; ++k) b[perm_col_[k]] = z_[k];
    for (const auto& eta : etas_) {
      const double t = b[eta.slot] / eta.pivot;
      if (t != 0.0)
        for (const auto& [r, v] : eta.entries) b[r] -= v * t;
      b[eta.slot] = t;
    }
  }

  // c: dense over basis slots -> dual values dense over original rows.
  void btran(std::vector<double>& c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double t = c[it->slot];
      for (const auto& [r, v] : it->entries) t -= c[r] * v;
      c[it->slot] = t / it->pivot;
    }
    y_.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) y_[k] = c[perm_col_[k]];
    for (int k = 0; k < m_; ++k) {
      y_[k] /= udiag_[k];
      const double t = y_[k];
      if (t != 0.0)
        for (const auto& [step, v] : urows_[k]) y_[step] -= v * t;
    }
    z_.assign(m_, 0.0);
    for (int k = m_ - 1; k >= 0; --k) {
      double t = y_[k];
      for (const auto& [r, mult] : lcols_[k]) t -= mult * z_[inv_row_[r]];
      z_[k] = t;
    }
    for (int k = 0; k < m_; ++k) c[perm_row_[k]] = z_[k];
  }

  // w = ftran(entering column); new basis differs at `slot`. False when the
  // update pivot is too small to apply stably.
  bool push_eta(int slot, const std::vector<double>& w) {
    if (std::abs(w[slot]) < 1e-8) return false;
    Eta eta;
    eta.slot = slot;
    eta.pivot = w[slot];
    for (int k = 0; k < m_; ++k)
      if (k != slot && std::abs(w[k]) >= kDropTol) eta.entries.emplace_back(k, w[k]);
    etas_.push_back(std::move(eta));
    return true;
  }

  int eta_count() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int slot = 0;
    double pivot = 0.0;
    std::vector<std::pair<int, double>> entries;
  };

  void remove_row_from_col(int row, int j) {
    auto& col = ce_[j];
    for (std::size_t t = 0; t < col.size(); ++t)
      if (col[t].first == row) {
        col[t] = col.back();
        col.pop_back();
        break;
      }
    if (col.size() == 1 && col_active_[j]) col_q_.push_back(j);
  }

  void remove_col_from_row(int j, int row) {
    auto& rl = rowlist_[row];
    for (std::size_t t = 0; t < rl.size(); ++t)
      if (rl[t] == j) {
        rl[t] = rl.back();
        rl.pop_back();
        break;
      }
    if (rl.size() == 1 && row_active_[row]) row_q_.push_back(row);
  }

  void eliminate(int pi, int pj, double pv) {
    perm_row_[step_] = pi;
    perm_col_[step_] = pj;
    inv_row_[pi] = step_;
    inv_col_[pj] = step_;
    udiag_[step_] = pv;

    auto& lcol = lcols_[step_];
    for (const auto& [r, v] : ce_[pj])
      if (r != pi) lcol.emplace_back(r, v / pv);

    // Pivot-row entries outside the pivot column (still slot-indexed).
    std::vector<std::pair<int, double>> pivot_row;
    for (int j : rowlist_[pi]) {
      if (j == pj) continue;
      for (const auto& [r, v] : ce_[j])
        if (r == pi) {
          pivot_row.emplace_back(j, v);
          break;
        }
    }
    std::sort(pivot_row.begin(), pivot_row.end());
    urows_[step_] = pivot_row;

    for (const auto& [j2, uval] : pivot_row) {
      auto& col = ce_[j2];
      touched_.clear();
      for (const auto& [r, v] : col) {
        work_[r] = v;
        mark_[r] = 1;
      }
      for (const auto& [r, mult] : lcol) {
        if (!mark_[r]) {
          mark_[r] = 1;
          work_[r] = 0.0;
          touched_.push_back(r);
        }
        work_[r] -= mult * uval;
      }
      prev_rows_.clear();
      for (const auto& [r, v] : col) prev_rows_.push_back(r);
      std::vector<std::pair<int, double>> nc;
      nc.reserve(col.size() + touched_.size());
      auto consider = [&](int r) {
        if (!mark_[r]) return;
        mark_[r] = 0;
        if (r == pi || !row_active_[r]) return;
        if (std::abs(work_[r]) >= kDropTol) nc.emplace_back(r, work_[r]);
      };
      for (int r : prev_rows_) consider(r);
      for (int r : touched_) consider(r);
      for (int r : prev_rows_) {
        const bool still =
            std::any_of(nc.begin(), nc.end(), [&](const auto& e) { return e.first == r; });
        if (!still) remove_col_from_row(j2, r);
      }
      for (const auto& [r, v] : nc) {
        const bool was = std::find(prev_rows_.begin(), prev_rows_.end(), r) != prev_rows_.end();
        if (!was) rowlist_[r].push_back(j2);
      }
      col = std::move(nc);
      if (col.size() == 1 && col_active_[j2]) col_q_.push_back(j2);
    }

    row_active_[pi] = 0;
    col_active_[pj] = 0;
    for (int j : std::vector<int>(rowlist_[pi]))
      if (j != pj && col_active_[j]) remove_row_from_col(pi, j);
    rowlist_[pi].clear();
    for (const auto& [r, v] : ce_[pj])
      if (r != pi) remove_col_from_row(pj, r);
    ce_[pj].clear();
    ++step_;
  }

  int m_ = 0;
  int step_ = 0;
  std::vector<int> perm_row_, perm_col_, inv_row_, inv_col_;
  std::vector<double> udiag_;
  std::vector<std::vector<std::pair<int, double>>> lcols_, urows_;
  std::vector<Eta> etas_;
  // Factorization scratch.
  std::vector<std::vector<std::pair<int, double>>> ce_;
  std::vector<std::vector<int>> rowlist_;
  std::vector<char> row_active_, col_active_, mark_;
  std::vector<double> work_;
  std::vector<int> touched_, prev_rows_, col_q_, row_q_;
  mutable std::vector<double> y_, z_;
};

class Simplex {
 public:
  Simplex(const Problem& p, const Options& opts) : p_(p), opts_(opts) {
    n_ = static_cast<int>(p.cols());
    m_ = static_cast<int>(p.rows());
    N_ = n_ + m_;

    col_start_.assign(n_ + 1, 0);
    for (const auto& row : p.row_entries)
      for (const auto& [j, v] : row) ++col_start_[j + 1];
    for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    for (int i = 0; i < m_; ++i)
      for (const auto& [j, v] : p.row_entries[i]) {
        col_row_[fill[j]] = i;
        col_val_[fill[j]] = v;
        ++fill[j];
      }

    lb_.resize(N_);
    ub_.resize(N_);
    cost_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = p.col_lb[j];
      ub_[j] = p.col_ub[j];
      cost_[j] = p.cost[j];
    }
    for (int i = 0; i < m_; ++i) {
      lb_[n_ + i] = p.row_lb[i];
      ub_[n_ + i] = p.row_ub[i];
    }
  }

  Solution run(const Basis* warm) {
    if (warm && !load_warm_basis(*warm)) warm = nullptr;
    if (!warm) reset_basis();
    factorize();
    recompute_basics();

    const std::int64_t max_iters =
        opts_.max_iters > 0 ? opts_.max_iters : 400LL * (n_ + m_) + 20000;
    std::int64_t iters = 0;
    int stall = 0;
    bool bland = false;
    bool refreshed = true;

    while (true) {
      if (iters >= max_iters) return finish(Status::kIterLimit, iters);

      const bool phase1 = max_infeasibility() > opts_.feas_tol;
      const int q = price(phase1, bland);
      if (q < 0) {
        if (!refreshed) {
          // Confirm on freshly factorized numbers before declaring.
          factorize();
          recompute_basics();
          refreshed = true;
          continue;
        }
        return finish(phase1 ? Status::kInfeasible : Status::kOptimal, iters);
      }

      const double dq = last_reduced_cost_;
      int dir;
      if (vstat_[q] == VarStatus::AtLower)
        dir = +1;
      else if (vstat_[q] == VarStatus::AtUpper)
        dir = -1;
      else
        dir = dq < 0 ? +1 : -1;

      w_.assign(m_, 0.0);
      column_scatter(q, w_);
      lu_.ftran(w_);

      // Ratio test; at ties prefer the bound flip, then the larger pivot,
      // then the lower variable index.
      const double flip_range = ub_[q] - lb_[q];
      double best_t = kInf;
      int best_slot = -1;
      double best_bound = 0.0, best_w = 0.0;
      if (std::isfinite(flip_range)) best_t = flip_range;

      for (int slot = 0; slot < m_; ++slot) {
        const double wk = w_[slot];
        if (std::abs(wk) <= kPivotTol) continue;
        const int b = basic_[slot];
        const double rate = -dir * wk;  // movement of this basic per unit step
        const double v = x_[b];
        double t, bound;
        if (phase1 && v < lb_[b] - opts_.feas_tol) {
          if (rate <= 0) continue;  // moves further out; accounted in the gradient
          t = (lb_[b] - v) / rate;
          bound = lb_[b];
        } else if (phase1 && v > ub_[b] + opts_.feas_tol) {
          if (rate >= 0) continue;
          t = (v - ub_[b]) / (-rate);
          bound = ub_[b];
        } else if (rate > 0) {
          if (ub_[b] == kInf) continue;
          t = (ub_[b] - v) / rate;
          bound = ub_[b];
        } else {
          if (lb_[b] == -kInf) continue;
          t = (v - lb_[b]) / (-rate);
          bound = lb_[b];
        }
        if (t < 0) t = 0;

        bool take;
        if (t < best_t - 1e-12) {
          take = true;
        } else if (t > best_t + 1e-12 || best_slot < 0) {
          take = false;  // worse, or tie against the flip
        } else if (std::abs(wk) > std::abs(best_w) + 1e-12) {
          take = true;
        } else if (std::abs(wk) < std::abs(best_w) - 1e-12) {
          take = false;
        } else {
          take = b < basic_[best_slot];
        }
        if (take) {
          best_t = t;
          best_slot = slot;
          best_bound = bound;
          best_w = wk;
        }
      }

      if (best_t == kInf) {
        if (phase1) throw std::runtime_error("lp: phase-1 direction unbounded");
        return finish(Status::kUnbounded, iters);
      }

      if (best_t > 0) {
        for (int slot = 0; slot < m_; ++slot)
          if (w_[slot] != 0.0) x_[basic_[slot]] -= best_t * dir * w_[slot];
        x_[q] += dir * best_t;
      }
      if (best_slot < 0) {
        vstat_[q] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
      } else {
        const int leaving = basic_[best_slot];
        x_[leaving] = best_bound;
        vstat_[leaving] = best_bound == lb_[leaving] ? VarStatus::AtLower : VarStatus::AtUpper;
        vstat_[q] = VarStatus::Basic;
        basic_[best_slot] = q;
        refreshed = false;
        if (!lu_.push_eta(best_slot, w_) || lu_.eta_count() > kEtaLimit) {
          factorize();
          recompute_basics();
          refreshed = true;
        }
      }

      stall = best_t <= 1e-10 ? stall + 1 : 0;
      bland = stall > kStallLimit;
      ++iters;
    }
  }

 private:
  bool load_warm_basis(const Basis& warm) {
    if (warm.vstat.size() != static_cast<std::size_t>(N_) ||
        warm.basic.size() != static_cast<std::size_t>(m_))
      return false;
    std::vector<char> is_basic(N_, 0);
    for (int slot = 0; slot < m_; ++slot) {
      const int b = warm.basic[slot];
      if (b < 0 || b >= N_ || is_basic[b]) return false;
      if (warm.vstat[static_cast<std::size_t>(b)] !=
          static_cast<unsigned char>(VarStatus::Basic))
        return false;
      is_basic[b] = 1;
    }
    vstat_.resize(N_);
    x_.assign(N_, 0.0);
    for (int j = 0; j < N_; ++j) {
      const auto st = static_cast<VarStatus>(warm.vstat[static_cast<std::size_t>(j)]);
      if (st == VarStatus::Basic && !is_basic[j]) return false;
      vstat_[j] = st;
      switch (st) {
        case VarStatus::Basic:
          break;
        case VarStatus::AtLower:
          // Bounds may have changed since the basis was recorded; snap to a
          // finite bound so the nonbasic value is well-defined.
          if (lb_[j] > -kInf)
            x_[j] = lb_[j];
          else if (ub_[j] < kInf) {
            vstat_[j] = VarStatus::AtUpper;
            x_[j] = ub_[j];
          } else {
            vstat_[j] = VarStatus::Free;
          }
          break;
        case VarStatus::AtUpper:
          if (ub_[j] < kInf)
            x_[j] = ub_[j];
          else if (lb_[j] > -kInf) {
            vstat_[j] = VarStatus::AtLower;
            x_[j] = lb_[j];
          } else {
            vstat_[j] = VarStatus::Free;
          }
          break;
        case VarStatus::Free:
          if (lb_[j] > -kInf || ub_[j] < kInf) {
            vstat_[j] = lb_[j] > -kInf ? VarStatus::AtLower : VarStatus::AtUpper;
            x_[j] = lb_[j] > -kInf ? lb_[j] : ub_[j];
          }
          break;
      }
    }
    basic_ = warm.basic;
    return true;
  }

  void reset_basis() {
    vstat_.assign(N_, VarStatus::AtLower);
    x_.assign(N_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (lb_[j] > -kInf) {
        vstat_[j] = VarStatus::AtLower;
        x_[j] = lb_[j];
      } else if (ub_[j] < kInf) {
        vstat_[j] = VarStatus::AtUpper;
        x_[j] = ub_[j];
      } else {
        vstat_[j] = VarStatus::Free;
        x_[j] = 0.0;
      }
    }
    basic_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      vstat_[n_ + i] = VarStatus::Basic;
    }
  }

  void column_scatter(int j, std::vector<double>& dense) const {
    if (j < n_) {
      for (int t = col_start_[j]; t < col_start_[j + 1]; ++t) dense[col_row_[t]] += col_val_[t];
    } else {
      dense[j - n_] += -1.0;
    }
  }

  void factorize() {
    std::vector<std::vector<std::pair<int, double>>> cols(m_);
    for (int slot = 0; slot < m_; ++slot) {
      const int j = basic_[slot];
      if (j < n_) {
        for (int t = col_start_[j]; t < col_start_[j + 1]; ++t)
          cols[slot].emplace_back(col_row_[t], col_val_[t]);
      } else {
        cols[slot].emplace_back(j - n_, -1.0);
      }
    }
    if (!lu_.factor(m_, cols)) {
      reset_basis();
      std::vector<std::vector<std::pair<int, double>>> id(m_);
      for (int i = 0; i < m_; ++i) id[i].emplace_back(i, -1.0);
      if (!lu_.factor(m_, id)) throw std::runtime_error("lp: identity basis factorization failed");
    }
  }

  void recompute_basics() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < N_; ++j) {
      if (vstat_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
      if (j < n_) {
        for (int t = col_start_[j]; t < col_start_[j + 1]; ++t)
          rhs[col_row_[t]] -= col_val_[t] * x_[j];
      } else {
        rhs[j - n_] += x_[j];
      }
    }
    lu_.ftran(rhs);
    for (int slot = 0; slot < m_; ++slot) x_[basic_[slot]] = rhs[slot];
  }

  double max_infeasibility() const {
    double worst = 0.0;
    for (int slot = 0; slot < m_; ++slot) {
      const int b = basic_[slot];
      worst = std::max(worst, lb_[b] - x_[b]);
      worst = std::max(worst, x_[b] - ub_[b]);
    }
    return worst;
  }

  // Entering variable by Dantzig pricing (or Bland when stalled); -1 if none.
  int price(bool phase1, bool bland) {
    gamma_.assign(m_, 0.0);
    for (int slot = 0; slot < m_; ++slot) {
      const int b = basic_[slot];
      if (phase1) {
        if (x_[b] < lb_[b] - opts_.feas_tol)
          gamma_[slot] = -1.0;
        else if (x_[b] > ub_[b] + opts_.feas_tol)
          gamma_[slot] = 1.0;
      } else {
        gamma_[slot] = cost_[b];
      }
    }
    lu_.btran(gamma_);

    int best = -1;
    double best_score = opts_.opt_tol;
    for (int j = 0; j < N_; ++j) {
      if (vstat_[j] == VarStatus::Basic || lb_[j] == ub_[j]) continue;
      double d = phase1 ? 0.0 : cost_[j];
      if (j < n_) {
        for (int t = col_start_[j]; t < col_start_[j + 1]; ++t)
          d -= gamma_[col_row_[t]] * col_val_[t];
      } else {
        d += gamma_[j - n_];
      }
      double score = 0.0;
      if (vstat_[j] == VarStatus::AtLower && d < -opts_.opt_tol)
        score = -d;
      else if (vstat_[j] == VarStatus::AtUpper && d > opts_.opt_tol)
        score = d;
      else if (vstat_[j] == VarStatus::Free && std::abs(d) > opts_.opt_tol)
        score = std::abs(d);
      if (score > 0.0) {
        if (bland) {
          last_reduced_cost_ = d;
          return j;
        }
        if (score > best_score) {
          best_score = score;
          best = j;
          last_reduced_cost_ = d;
        }
      }
    }
    return best;
  }

  Solution finish(Status status, std::int64_t iters) {
    factorize();
    recompute_basics();

    Solution sol;
    sol.status = status;
    sol.iterations = iters;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += p_.cost[j] * sol.x[j];

    sol.row_activity.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i)
      for (const auto& [j, v] : p_.row_entries[i]) sol.row_activity[i] += v * sol.x[j];

    gamma_.assign(m_, 0.0);
    for (int slot = 0; slot < m_; ++slot) gamma_[slot] = cost_[basic_[slot]];
    lu_.btran(gamma_);
    sol.y = gamma_;
    sol.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double d = cost_[j];
      for (int t = col_start_[j]; t < col_start_[j + 1]; ++t)
        d -= gamma_[col_row_[t]] * col_val_[t];
      sol.reduced_cost[j] = d;
    }
    sol.basis.vstat.resize(N_);
    for (int j = 0; j < N_; ++j)
      sol.basis.vstat[static_cast<std::size_t>(j)] = static_cast<unsigned char>(vstat_[j]);
    sol.basis.basic = basic_;
    return sol;
  }

  const Problem& p_;
  Options opts_;
  int n_ = 0, m_ = 0, N_ = 0;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<double> lb_, ub_, cost_, x_;
  std::vector<VarStatus> vstat_;
  std::vector<int> basic_;
  std::vector<double> w_, gamma_;
  BasisLU lu_;
  double last_reduced_cost_ = 0.0;
};

}  // namespace

int Problem::add_col(double c, double lb, double ub) {
  cost.push_back(c);
  col_lb.push_back(lb);
  col_ub.push_back(ub);
  return static_cast<int>(cost.size()) - 1;
}

int Problem::add_row(double lb, double ub, std::span<const int> idx,
                     std::span<const double> val) {
  row_lb.push_back(lb);
  row_ub.push_back(ub);
  std::vector<std::pair<int, double>> entries;
  entries.reserve(idx.size());
  for (std::size_t t = 0; t < idx.size(); ++t) entries.emplace_back(idx[t], val[t]);
  row_entries.push_back(std::move(entries));
  return static_cast<int>(row_lb.size()) - 1;
}

Solution solve(const Problem& p, const Options& opts, const Basis* warm) {
  if (p.col_lb.size() != p.cols() || p.col_ub.size() != p.cols())
    throw std::invalid_argument("lp: inconsistent column arrays");
  if (p.row_entries.size() != p.rows() || p.row_ub.size() != p.rows())
    throw std::invalid_argument("lp: inconsistent row arrays");
  Simplex s(p, opts);
  return s.run(warm);
}

double max_violation(const Problem& p, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.cols(); ++j) {
    worst = std::max(worst, p.col_lb[j] - x[j]);
    worst = std::max(worst, x[j] - p.col_ub[j]);
  }
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double act = 0.0;
    for (const auto& [j, v] : p.row_entries[i]) act += v * x[j];
    worst = std::max(worst, p.row_lb[i] - act);
    worst = std::max(worst, act - p.row_ub[i]);
  }
  return worst;
}

}  // namespace mgbench::lp
