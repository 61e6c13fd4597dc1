// Copyright 2026 The PaQL Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "paql/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace paql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kSingular: return "singular";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "?";
}

DenseSimplex::DenseSimplex(const IlpModel& model, SimplexOptions options)
    : options_(options),
      m_(model.constraints.size()),
      n_(model.num_variables()),
      cols_(n_ + m_),
      maximize_(model.direction == Direction::kMaximize) {
  a_.resize(m_ * n_);
  rhs_.resize(m_);
  lb_.assign(cols_, 0.0);
  ub_.assign(cols_, kInf);
  for (std::size_t r = 0; r < m_; ++r) {
    const LinearConstraint& row = model.constraints[r];
    if (row.coefficients.size() != n_) {
      throw std::invalid_argument("constraint width does not match model");
    }
    std::copy(row.coefficients.begin(), row.coefficients.end(),
              a_.begin() + static_cast<std::ptrdiff_t>(r * n_));
    rhs_[r] = row.rhs;
    switch (row.sense) {
      case RowSense::kLe: lb_[n_ + r] = 0.0; ub_[n_ + r] = kInf; break;
      case RowSense::kGe: lb_[n_ + r] = -kInf; ub_[n_ + r] = 0.0; break;
      case RowSense::kEq: lb_[n_ + r] = 0.0; ub_[n_ + r] = 0.0; break;
    }
  }
  cost_.assign(cols_, 0.0);
  for (std::size_t j = 0; j < n_ && j < model.objective.size(); ++j) {
    cost_[j] = maximize_ ? -model.objective[j] : model.objective[j];
  }
  for (std::size_t j = 0; j < n_; ++j) {
    lb_[j] = static_cast<double>(model.variables[j].lower);
    if (model.variables[j].upper) {
      ub_[j] = static_cast<double>(*model.variables[j].upper);
    }
  }
  restore_slack_basis();
}

void DenseSimplex::reset() { restore_slack_basis(); }

void DenseSimplex::restore_slack_basis() {
  tableau_.assign(m_ * cols_, 0.0);
  for (std::size_t r = 0; r < m_; ++r) {
    std::copy(a_.begin() + static_cast<std::ptrdiff_t>(r * n_),
              a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_),
              tableau_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
    at(r, n_ + r) = 1.0;
  }
  head_.resize(m_);
  basic_.assign(cols_, 0);
  at_upper_.assign(cols_, 0);
  for (std::size_t r = 0; r < m_; ++r) {
    head_[r] = n_ + r;
    basic_[n_ + r] = 1;
  }
  for (std::size_t j = 0; j < cols_; ++j) {
    if (!basic_[j] && std::isinf(lb_[j])) at_upper_[j] = 1;
  }
  beta_.assign(m_, 0.0);
}

double DenseSimplex::value_of_nonbasic(std::size_t j) const {
  const double v = at_upper_[j] ? ub_[j] : lb_[j];
  return std::isfinite(v) ? v : 0.0;
}

bool DenseSimplex::refactor() {
  if (m_ == 0) return true;
  // Gauss-Jordan on [B | I] with partial pivoting.
  const std::size_t w = 2 * m_;
  std::vector<double> work(m_ * w, 0.0);
  for (std::size_t k = 0; k < m_; ++k) {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t h = head_[i];
      work[k * w + i] = h < n_ ? a_[k * n_ + h] : (h - n_ == k ? 1.0 : 0.0);
    }
    work[k * w + m_ + k] = 1.0;
  }
  for (std::size_t c = 0; c < m_; ++c) {
    std::size_t p = c;
    for (std::size_t k = c + 1; k < m_; ++k) {
      if (std::abs(work[k * w + c]) > std::abs(work[p * w + c])) p = k;
    }
    if (std::abs(work[p * w + c]) < 1e-11) return false;
    if (p != c) {
      std::swap_ranges(work.begin() + static_cast<std::ptrdiff_t>(p * w),
                       work.begin() + static_cast<std::ptrdiff_t>((p + 1) * w),
                       work.begin() + static_cast<std::ptrdiff_t>(c * w));
    }
    const double inv = 1.0 / work[c * w + c];
    for (std::size_t j = 0; j < w; ++j) work[c * w + j] *= inv;
    for (std::size_t k = 0; k < m_; ++k) {
      if (k == c) continue;
      const double f = work[k * w + c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) work[k * w + j] -= f * work[c * w + j];
    }
  }
  // Row i of the inverse belongs to basic column head_[i].
  for (std::size_t i = 0; i < m_; ++i) {
    double* out = &tableau_[i * cols_];
    const double* inv = &work[i * w + m_];
    std::fill(out, out + n_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const double f = inv[k];
      if (f == 0.0) continue;
      const double* row = &a_[k * n_];
      for (std::size_t j = 0; j < n_; ++j) out[j] += f * row[j];
    }
    std::copy(inv, inv + m_, out + n_);
  }
  for (std::size_t i = 0; i < m_; ++i) {
    at(i, head_[i]) = 1.0;
    for (std::size_t k = 0; k < m_; ++k) {
      if (k != i) at(k, head_[i]) = 0.0;
    }
  }
  return true;
}

void DenseSimplex::recompute_beta() {
  for (std::size_t r = 0; r < m_; ++r) {
    double v = 0.0;
    const double* row = &tableau_[r * cols_];
    for (std::size_t k = 0; k < m_; ++k) v += row[n_ + k] * rhs_[k];
    for (std::size_t j = 0; j < cols_; ++j) {
      if (basic_[j]) continue;
      const double x = value_of_nonbasic(j);
      if (x != 0.0) v -= row[j] * x;
    }
    beta_[r] = v;
  }
}

bool DenseSimplex::primal_feasible(std::size_t r) const {
  const std::size_t h = head_[r];
  const double v = beta_[r];
  const double tol = options_.primal_tol;
  return v >= lb_[h] - tol * (1.0 + std::abs(lb_[h])) &&
         v <= ub_[h] + tol * (1.0 + std::abs(ub_[h]));
}

void DenseSimplex::pivot(std::size_t r, std::size_t j) {
  double* prow = &tableau_[r * cols_];
  const double inv = 1.0 / prow[j];
  for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
  prow[j] = 1.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * cols_];
    const double f = row[j];
    if (f == 0.0) continue;
    for (std::size_t c = 0; c < cols_; ++c) row[c] -= f * prow[c];
    row[j] = 0.0;
  }
}

LpResult DenseSimplex::solve(std::span<const double> lower,
                             std::span<const double> upper) {
  if (lower.size() != n_ || upper.size() != n_) {
    throw std::invalid_argument("bound vectors do not match model");
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (!std::isfinite(lower[j])) {
      throw std::invalid_argument("structural lower bounds must be finite");
    }
    lb_[j] = lower[j];
    ub_[j] = upper[j];
  }
  for (std::size_t j = 0; j < cols_; ++j) {
    if (basic_[j]) continue;
    if (at_upper_[j] && std::isinf(ub_[j])) at_upper_[j] = 0;
    if (!at_upper_[j] && std::isinf(lb_[j])) at_upper_[j] = 1;
  }
  recompute_beta();

  double cmax = 1.0;
  for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost_[j]));

  LpResult result;
  const std::size_t max_iterations = 1000 + 20 * cols_;
  std::vector<double> cb(m_), d(cols_), last_cb;
  bool d_valid = false;
  bool last_phase1 = false;
  std::size_t degenerate_run = 0;
  std::size_t since_refactor = 0;
  std::size_t final_checks = 0;
  bool bland = false;

  while (true) {
    if (result.iterations >= max_iterations) {
      result.status = LpStatus::kIterationLimit;
      return result;
    }
    bool phase1 = false;
    for (std::size_t r = 0; r < m_; ++r) {
      if (!std::isfinite(beta_[r])) {
        result.status = LpStatus::kSingular;
        return result;
      }
      if (!primal_feasible(r)) phase1 = true;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t h = head_[r];
      if (phase1) {
        cb[r] = primal_feasible(r) ? 0.0 : (beta_[r] < lb_[h] ? -1.0 : 1.0);
      } else {
        cb[r] = cost_[h];
      }
    }
    // d = c - cb^T T. Bound flips leave the basis alone, so d is reused
    // until the basis or the phase costs change.
    if (!d_valid || phase1 != last_phase1 || cb != last_cb) {
      for (std::size_t j = 0; j < cols_; ++j) d[j] = phase1 ? 0.0 : cost_[j];
      for (std::size_t r = 0; r < m_; ++r) {
        const double f = cb[r];
        if (f == 0.0) continue;
        const double* row = &tableau_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) d[j] -= f * row[j];
      }
      d_valid = true;
      last_phase1 = phase1;
      last_cb = cb;
    }
    const double dtol = options_.dual_tol * (phase1 ? 1.0 : cmax);

    std::size_t entering = cols_;
    double best_score = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (basic_[j] || lb_[j] == ub_[j]) continue;
      double score = 0.0;
      if (!at_upper_[j] && d[j] < -dtol) score = -d[j];
      if (at_upper_[j] && d[j] > dtol) score = d[j];
      if (score == 0.0) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (score > best_score) {
        best_score = score;
        entering = j;
      }
    }

    if (entering == cols_) {
      if (since_refactor > 0 && final_checks < 3) {
        ++final_checks;
        if (!refactor()) restore_slack_basis();
        recompute_beta();
        since_refactor = 0;
        d_valid = false;
        continue;
      }
      if (phase1) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      break;
    }

    struct Step {
      double theta;
      std::size_t leave;
      bool to_upper;
    };
    // Ratio test for moving column j away from its current bound.
    const auto ratio_test = [&](std::size_t j) {
      const double dir = at_upper_[j] ? -1.0 : 1.0;
      Step step{ub_[j] - lb_[j], m_, false};  // bound flip distance
      double leave_pivot = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double t = at(r, j);
        if (std::abs(t) <= options_.pivot_tol) continue;
        const double rate = -dir * t;
        const std::size_t h = head_[r];
        const double v = beta_[r];
        double limit = kInf;
        bool to_upper = false;
        if (phase1 && !primal_feasible(r)) {
          if (v < lb_[h] && rate > 0.0) {
            limit = (lb_[h] - v) / rate;
          } else if (v > ub_[h] && rate < 0.0) {
            limit = (v - ub_[h]) / -rate;
            to_upper = true;
          }
        } else if (rate > 0.0 && std::isfinite(ub_[h])) {
          limit = (ub_[h] - v) / rate;
          to_upper = true;
        } else if (rate < 0.0 && std::isfinite(lb_[h])) {
          limit = (v - lb_[h]) / -rate;
        }
        if (!std::isfinite(limit)) continue;
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < step.theta - 1e-12) {
          take = true;
        } else if (limit <= step.theta + 1e-12 && step.leave != m_) {
          take = bland ? h < head_[step.leave] : std::abs(t) > leave_pivot;
        }
        if (take) {
          step = {limit, r, to_upper};
          leave_pivot = std::abs(t);
        }
      }
      return step;
    };
    const auto flip = [&](std::size_t j, double theta) {
      const double dir = at_upper_[j] ? -1.0 : 1.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double t = at(r, j);
        if (t != 0.0) beta_[r] -= dir * t * theta;
      }
      at_upper_[j] = at_upper_[j] ? 0 : 1;
    };

    const double dir = at_upper_[entering] ? -1.0 : 1.0;
    const Step step = ratio_test(entering);
    const double theta = step.theta;
    const std::size_t leave = step.leave;
    const bool leave_to_upper = step.to_upper;

    if (!std::isfinite(theta)) {
      result.status = phase1 ? LpStatus::kSingular : LpStatus::kUnbounded;
      return result;
    }

    if (leave == m_) {
      flip(entering, theta);
      ++result.iterations;
      degenerate_run = 0;
      bland = false;
      // The basis is unchanged, so in phase 2 d stays exact: take every other
      // improving column that can also go all the way to its other bound.
      if (!phase1) {
        for (std::size_t j = 0; j < cols_; ++j) {
          if (basic_[j] || lb_[j] == ub_[j]) continue;
          const bool improving = (!at_upper_[j] && d[j] < -dtol) ||
                                 (at_upper_[j] && d[j] > dtol);
          if (!improving) continue;
          const Step other = ratio_test(j);
          if (other.leave != m_ || !std::isfinite(other.theta)) continue;
          flip(j, other.theta);
          ++result.iterations;
        }
      }
      continue;
    }
    {
      const double entering_value = value_of_nonbasic(entering) + dir * theta;
      for (std::size_t r = 0; r < m_; ++r) {
        const double t = at(r, entering);
        if (t != 0.0) beta_[r] -= dir * t * theta;
      }
      const std::size_t h = head_[leave];
      pivot(leave, entering);
      basic_[h] = 0;
      at_upper_[h] = leave_to_upper ? 1 : 0;
      if (!leave_to_upper && std::isinf(lb_[h])) at_upper_[h] = 1;
      basic_[entering] = 1;
      at_upper_[entering] = 0;
      head_[leave] = entering;
      beta_[leave] = entering_value;
      ++since_refactor;
      d_valid = false;
    }
    ++result.iterations;

    if (theta <= 1e-12) {
      if (++degenerate_run >= options_.degenerate_switch) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if (since_refactor >= options_.refactor_every) {
      if (!refactor()) restore_slack_basis();
      recompute_beta();
      since_refactor = 0;
      d_valid = false;
    }
  }

  result.status = LpStatus::kOptimal;
  result.x.assign(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    if (!basic_[j]) result.x[j] = value_of_nonbasic(j);
  }
  for (std::size_t r = 0; r < m_; ++r) {
    if (head_[r] < n_) result.x[head_[r]] = beta_[r];
  }
  double objective = 0.0;
  for (std::size_t j = 0; j < n_; ++j) objective += cost_[j] * result.x[j];
  result.objective = maximize_ ? -objective : objective;
  result.reduced_costs.assign(d.begin(), d.begin() + static_cast<long>(n_));
  return result;
}

LpResult lp_relax(const IlpModel& model) {
  std::vector<double> lower(model.num_variables());
  std::vector<double> upper(model.num_variables());
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    lower[j] = static_cast<double>(model.variables[j].lower);
    upper[j] = model.variables[j].upper
                   ? static_cast<double>(*model.variables[j].upper)
                   : kInf;
  }
  DenseSimplex simplex(model);
  return simplex.solve(lower, upper);
}

}  // namespace paql
