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

#include "paql/solver.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "paql/error.hpp"

namespace paql {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kTimeLimit: return "TimeLimit";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundTol = 1e-9;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void require_bounded(const IlpModel& model) {
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (!model.variables[j].upper) {
      throw UnboundedError("unbounded: variable for tuple " +
                           std::to_string(model.variables[j].tuple_id) +
                           " has no finite upper bound");
    }
  }
}

// Upper bound on the total multiplicity of any optimal solution, when every
// unit costs something and all rows have non-negative coefficients. Then
// optimal solutions are minimal: each unit is needed by some >= row r, and
// r needs at most (b_r + max a_r) / (min positive a_r) units.
std::optional<double> optimal_total_cap(const IlpModel& model) {
  const double sign = model.direction == Direction::kMaximize ? 1.0 : -1.0;
  for (double c : model.objective) {
    if (!(sign * c < 0.0)) return std::nullopt;
  }
  double cap = 0.0;
  for (const LinearConstraint& row : model.constraints) {
    if (row.sense == RowSense::kEq) return std::nullopt;
    double lo = kInf, hi = 0.0;
    for (double a : row.coefficients) {
      if (a < 0.0) return std::nullopt;
      if (a > 0.0) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
    }
    if (row.sense == RowSense::kGe && lo < kInf && row.rhs > 0.0) {
      cap += std::floor((row.rhs + hi) / lo + 1e-9);
    }
  }
  return cap;
}

// Fixes to zero every column some other column k dominates: k is no worse
// in the objective and in every row, and x_k has room for the dominated
// units, either because a non-negative <= row caps x_k within its bound or
// because optimal solutions are small. At least one optimal solution
// survives.
IlpModel fix_dominated_columns(IlpModel model) {
  constexpr std::size_t kMaxDominators = 256;
  const std::size_t n = model.num_variables();
  const auto& rows = model.constraints;
  std::vector<std::size_t> knapsack_rows;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].sense != RowSense::kLe || !(rows[r].rhs >= 0.0)) continue;
    if (std::all_of(rows[r].coefficients.begin(), rows[r].coefficients.end(),
                    [](double a) { return a >= 0.0; })) {
      knapsack_rows.push_back(r);
    }
  }
  const std::optional<double> total_cap = optimal_total_cap(model);
  if (knapsack_rows.empty() && !total_cap) return model;
  const auto absorbs = [&](std::size_t k) {
    const auto upper = static_cast<double>(*model.variables[k].upper);
    if (total_cap && *total_cap <= upper) return true;
    for (std::size_t r : knapsack_rows) {
      const double a = rows[r].coefficients[k];
      if (a > 0.0 && std::floor(rows[r].rhs / a + 1e-9) <= upper) {
        return true;
      }
    }
    return false;
  };
  const auto dominates = [&](std::size_t k, std::size_t i) {
    for (const LinearConstraint& row : rows) {
      const double ak = row.coefficients[k], ai = row.coefficients[i];
      switch (row.sense) {
        case RowSense::kLe: if (ak > ai) return false; break;
        case RowSense::kGe: if (ak < ai) return false; break;
        case RowSense::kEq: if (ak != ai) return false; break;
      }
    }
    return true;
  };
  const double sign = model.direction == Direction::kMaximize ? 1.0 : -1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sign * model.objective[a] > sign * model.objective[b];
  });
  std::vector<std::size_t> dominators;
  for (std::size_t i : order) {
    Variable& v = model.variables[i];
    if (v.lower == 0 && *v.upper > 0 &&
        std::any_of(dominators.begin(), dominators.end(),
                    [&](std::size_t k) { return dominates(k, i); })) {
      v.upper = 0;
    } else if (dominators.size() < kMaxDominators && absorbs(i)) {
      dominators.push_back(i);
    }
  }
  return model;
}

bool integral_objective(const IlpModel& model) {
  for (double c : model.objective) {
    if (c != std::floor(c) || std::abs(c) > 1e15) return false;
  }
  return true;
}

struct BoundChange {
  std::size_t var;
  double lower;
  double upper;
};

struct Node {
  std::vector<BoundChange> changes;
  double parent_bound = kInf;  // internal (maximization) sense
  double parent_lp = kInf;     // unrounded relaxation value of the parent
  std::size_t seq = 0;         // creation order, for deterministic ties
};

// Heap order for best-bound selection: higher parent bound first, then the
// most recently created node.
bool explored_later(const Node& a, const Node& b) {
  if (a.parent_bound != b.parent_bound) return a.parent_bound < b.parent_bound;
  return a.seq < b.seq;
}

class Search {
 public:
  // `cutoff` (maximization sense) makes the search look only for solutions
  // strictly better than it.
  Search(const IlpModel& model, const SolverConfig& config,
         Clock::time_point start, std::optional<double> cutoff = std::nullopt,
         std::size_t depth = 0)
      : model_(model),
        config_(config),
        start_(start),
        depth_(depth),
        sign_(model.direction == Direction::kMaximize ? 1.0 : -1.0),
        integral_objective_(integral_objective(model)),
        lp_(model) {
    if (cutoff) {
      incumbent_value_ = *cutoff;
      has_value_ = true;
    }
  }

  SolveResult run() {
    const std::size_t n = model_.num_variables();
    root_lower_.resize(n);
    root_upper_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      root_lower_[j] = static_cast<double>(model_.variables[j].lower);
      root_upper_[j] = static_cast<double>(*model_.variables[j].upper);
    }
    lower_ = root_lower_;
    upper_ = root_upper_;
    free_count_ = n;

    SolveResult result;
    bool stopped = false;
    bool empty_box = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (root_lower_[j] > root_upper_[j]) empty_box = true;
    }
    // Depth-first until there is an incumbent, best-bound afterwards.
    std::vector<Node> open;
    bool best_first = false;
    if (!empty_box) open.push_back(Node{});
    while (!open.empty()) {
      if (elapsed_ms(start_) > config_.time_limit_s * 1000.0 ||
          (config_.node_limit && result.stats.nodes >= *config_.node_limit)) {
        stopped = true;
        break;
      }
      if (best_first) std::pop_heap(open.begin(), open.end(), explored_later);
      Node node = std::move(open.back());
      open.pop_back();
      if (has_value_ && !improves(node.parent_bound)) continue;
      ++result.stats.nodes;
      const std::size_t before = open.size();
      process(node, open, result.stats);
      if (worth_reducing()) {
        stopped = solve_reduced(result.stats);
        break;
      }
      if (best_first) {
        for (std::size_t i = before + 1; i <= open.size(); ++i) {
          std::push_heap(open.begin(), open.begin() + static_cast<long>(i),
                         explored_later);
        }
      } else if (has_value_) {
        best_first = true;
        std::make_heap(open.begin(), open.end(), explored_later);
      }
    }

    result.stats.wall_ms = elapsed_ms(start_);
    if (incumbent_) {
      result.solution = *incumbent_;
      result.objective = objective_value(model_, *incumbent_);
    }
    if (stopped) {
      result.status = SolveStatus::kTimeLimit;
    } else {
      result.status =
          incumbent_ ? SolveStatus::kOptimal : SolveStatus::kInfeasible;
    }
    return result;
  }

 private:
  bool improves(double bound) const {
    const double slack =
        std::max(kBoundTol * std::max(1.0, std::abs(incumbent_value_)),
                 config_.relative_gap * std::abs(incumbent_value_));
    return bound > incumbent_value_ + slack;
  }

  // Root reduced-cost fixing: moving a nonbasic variable k units away from
  // its root bound lowers the root relaxation by at least k * |d_j|, so any
  // k that drops it to the incumbent cannot lead to an improving solution.
  void fix_by_reduced_cost() {
    if (!has_value_ || root_d_.empty()) return;
    const double slack =
        std::max(kBoundTol * std::max(1.0, std::abs(incumbent_value_)),
                 config_.relative_gap * std::abs(incumbent_value_));
    const double room = root_value_ - (incumbent_value_ + slack);
    if (!(room >= 0.0)) return;
    for (std::size_t j = 0; j < root_d_.size(); ++j) {
      const double d = root_d_[j];
      if (std::abs(d) <= 1e-9) continue;
      const double steps = std::floor(room / std::abs(d) + 1e-7);
      if (steps >= 1e15) continue;
      if (d > 0.0 && root_x_[j] <= root_lower_[j]) {
        root_upper_[j] = std::min(root_upper_[j], root_lower_[j] + steps);
        upper_[j] = root_upper_[j];
      } else if (d < 0.0 && root_x_[j] >= root_upper_[j]) {
        root_lower_[j] = std::max(root_lower_[j], root_upper_[j] - steps);
        lower_[j] = root_lower_[j];
      }
    }
    free_count_ = 0;
    for (std::size_t j = 0; j < root_d_.size(); ++j) {
      if (root_lower_[j] < root_upper_[j]) ++free_count_;
    }
  }

  // Once most variables are fixed at the root, the remaining search runs
  // faster on a model without them.
  bool worth_reducing() const {
    const std::size_t n = model_.num_variables();
    return depth_ < 8 && n >= 64 && free_count_ * 4 <= n;
  }

  // Restarts the search on the free variables only, with the current
  // incumbent value as cutoff. Returns true when the time or node limit
  // stopped it.
  bool solve_reduced(SolveStats& stats) {
    const std::size_t n = model_.num_variables();
    const std::size_t m = model_.constraints.size();
    std::vector<std::size_t> keep;
    std::vector<long double> shift(m, 0.0L);
    long double objective_shift = 0.0L;
    IlpModel reduced;
    reduced.direction = model_.direction;
    for (std::size_t j = 0; j < n; ++j) {
      if (root_lower_[j] < root_upper_[j]) {
        keep.push_back(j);
        Variable v = model_.variables[j];
        v.lower = static_cast<std::int64_t>(root_lower_[j]);
        v.upper = static_cast<std::int64_t>(root_upper_[j]);
        reduced.variables.push_back(v);
        reduced.objective.push_back(model_.objective[j]);
        continue;
      }
      const long double value = root_lower_[j];
      if (value == 0.0L) continue;
      for (std::size_t r = 0; r < m; ++r) {
        shift[r] += static_cast<long double>(model_.constraints[r].coefficients[j]) *
                    value;
      }
      objective_shift += static_cast<long double>(model_.objective[j]) * value;
    }
    for (std::size_t r = 0; r < m; ++r) {
      const LinearConstraint& row = model_.constraints[r];
      LinearConstraint out;
      out.sense = row.sense;
      out.provenance = row.provenance;
      out.rhs = static_cast<double>(row.rhs - shift[r]);
      out.coefficients.reserve(keep.size());
      for (std::size_t j : keep) out.coefficients.push_back(row.coefficients[j]);
      reduced.constraints.push_back(std::move(out));
    }

    SolverConfig config = config_;
    if (config.node_limit) {
      config.node_limit = *config.node_limit - std::min(*config.node_limit,
                                                        stats.nodes);
    }
    const double cutoff =
        incumbent_value_ - sign_ * static_cast<double>(objective_shift);
    Search sub(reduced, config, start_, cutoff, depth_ + 1);
    const SolveResult r = sub.run();
    stats.nodes += r.stats.nodes;
    stats.lp_iterations += r.stats.lp_iterations;
    stats.bound_violations += r.stats.bound_violations;
    if (r.solution) {
      std::vector<std::int64_t> x(n);
      for (std::size_t j = 0; j < n; ++j) {
        x[j] = static_cast<std::int64_t>(root_lower_[j]);
      }
      for (std::size_t i = 0; i < keep.size(); ++i) x[keep[i]] = (*r.solution)[i];
      if (feasible(model_, x, config_.feasibility_tol)) {
        const double v = sign_ * objective_value(model_, x);
        if (!has_value_ || v > incumbent_value_) {
          incumbent_ = std::move(x);
          incumbent_value_ = v;
          has_value_ = true;
        }
      }
    }
    return r.status == SolveStatus::kTimeLimit;
  }

  // Primal heuristic: round the relaxation down, repair violated rows one
  // unit at a time, then greedily move variables in the improving direction
  // while every row stays satisfied.
  void round_and_fill(const std::vector<double>& relaxed) {
    const std::size_t n = relaxed.size();
    const std::size_t m = model_.constraints.size();
    std::vector<std::int64_t> x(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = std::clamp(std::floor(relaxed[j] + 1e-9), lower_[j],
                                  upper_[j]);
      x[j] = static_cast<std::int64_t>(v);
    }
    std::vector<long double> act(m, 0.0L);
    for (std::size_t r = 0; r < m; ++r) {
      const auto& a = model_.constraints[r].coefficients;
      for (std::size_t j = 0; j < n; ++j) {
        if (x[j] != 0) act[r] += static_cast<long double>(a[j]) * x[j];
      }
    }
    const auto violation = [&](std::size_t r, long double v) -> long double {
      const LinearConstraint& row = model_.constraints[r];
      switch (row.sense) {
        case RowSense::kLe: return std::max(0.0L, v - row.rhs);
        case RowSense::kGe: return std::max(0.0L, row.rhs - v);
        case RowSense::kEq: return std::abs(v - row.rhs);
      }
      return 0.0L;
    };

    // Repair: the unit move that most reduces total violation.
    for (std::size_t step = 0; step < 4 * m + 64; ++step) {
      long double total = 0.0L;
      for (std::size_t r = 0; r < m; ++r) total += violation(r, act[r]);
      if (total <= 0.0L) break;
      std::size_t best = n;
      int best_dir = 0;
      long double best_total = total;
      for (std::size_t j = 0; j < n; ++j) {
        for (int dir : {1, -1}) {
          const double next = static_cast<double>(x[j] + dir);
          if (next < lower_[j] || next > upper_[j]) continue;
          long double t = 0.0L;
          for (std::size_t r = 0; r < m; ++r) {
            t += violation(r, act[r] + dir * static_cast<long double>(
                                               model_.constraints[r].coefficients[j]));
          }
          if (t < best_total) {
            best_total = t;
            best = j;
            best_dir = dir;
          }
        }
      }
      if (best == n) return;
      x[best] += best_dir;
      for (std::size_t r = 0; r < m; ++r) {
        act[r] += best_dir * static_cast<long double>(
                                 model_.constraints[r].coefficients[best]);
      }
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (violation(r, act[r]) > 0.0L) return;
    }

    // Fill: largest objective gain first.
    if (fill_order_.empty() && n > 0) {
      fill_order_.resize(n);
      std::iota(fill_order_.begin(), fill_order_.end(), 0);
      std::stable_sort(fill_order_.begin(), fill_order_.end(),
                       [&](std::size_t a, std::size_t b) {
                         return std::abs(model_.objective[a]) >
                                std::abs(model_.objective[b]);
                       });
    }
    for (std::size_t j : fill_order_) {
      const double gain = sign_ * model_.objective[j];
      if (gain == 0.0) break;
      const int dir = gain > 0.0 ? 1 : -1;
      long double units = dir > 0 ? upper_[j] - static_cast<double>(x[j])
                                  : static_cast<double>(x[j]) - lower_[j];
      for (std::size_t r = 0; r < m && units > 0.0L; ++r) {
        const LinearConstraint& row = model_.constraints[r];
        const long double a = dir * static_cast<long double>(row.coefficients[j]);
        if (a == 0.0L) continue;
        if (row.sense == RowSense::kEq) {
          units = 0.0L;
        } else if (row.sense == RowSense::kLe && a > 0.0L) {
          units = std::min(units, std::floor((row.rhs - act[r]) / a));
        } else if (row.sense == RowSense::kGe && a < 0.0L) {
          units = std::min(units, std::floor((act[r] - row.rhs) / -a));
        }
      }
      if (!(units >= 1.0L)) continue;
      const auto k = static_cast<std::int64_t>(units);
      x[j] += dir * k;
      for (std::size_t r = 0; r < m; ++r) {
        act[r] += static_cast<long double>(dir) * k *
                  model_.constraints[r].coefficients[j];
      }
    }

    if (!feasible(model_, x, config_.feasibility_tol)) return;
    const double v = sign_ * objective_value(model_, x);
    if (!has_value_ || v > incumbent_value_) {
      incumbent_ = std::move(x);
      incumbent_value_ = v;
      has_value_ = true;
      fix_by_reduced_cost();
    }
  }

  double node_bound(double lp_value) const {
    if (!integral_objective_) return lp_value;
    return std::floor(lp_value + 1e-6);
  }

  LpResult solve_lp(SolveStats& stats) {
    LpResult lp = lp_.solve(lower_, upper_);
    stats.lp_iterations += lp.iterations;
    if (lp.status == LpStatus::kSingular ||
        lp.status == LpStatus::kIterationLimit) {
      lp_.reset();
      lp = lp_.solve(lower_, upper_);
      stats.lp_iterations += lp.iterations;
    }
    if (lp.status == LpStatus::kSingular ||
        lp.status == LpStatus::kIterationLimit) {
      throw Error("LP relaxation failed: " + std::string(to_string(lp.status)));
    }
    if (lp.status == LpStatus::kUnbounded) {
      throw Error("LP relaxation unbounded despite finite variable bounds");
    }
    return lp;
  }

  // Most fractional variable, ties by lowest tuple id. Returns n if the
  // point is integral within tolerance.
  std::size_t pick_branch(const std::vector<double>& x, double threshold) const {
    std::size_t best = x.size();
    double best_dist = threshold;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= threshold) continue;
      if (best == x.size() || dist > best_dist ||
          (dist == best_dist &&
           model_.variables[j].tuple_id < model_.variables[best].tuple_id)) {
        best = j;
        best_dist = dist;
      }
    }
    return best;
  }

  void process(const Node& node, std::vector<Node>& stack, SolveStats& stats) {
    // Root bounds may have been tightened since the node was created.
    bool empty = false;
    for (const BoundChange& c : node.changes) {
      lower_[c.var] = std::max(c.lower, root_lower_[c.var]);
      upper_[c.var] = std::min(c.upper, root_upper_[c.var]);
      if (lower_[c.var] > upper_[c.var]) empty = true;
    }
    LpResult lp;
    if (!empty) lp = solve_lp(stats);
    for (const BoundChange& c : node.changes) {
      lower_[c.var] = root_lower_[c.var];
      upper_[c.var] = root_upper_[c.var];
    }
    if (empty || lp.status == LpStatus::kInfeasible) return;
    if (node.changes.empty()) {
      root_value_ = sign_ * lp.objective;
      root_x_ = lp.x;
      root_d_ = std::move(lp.reduced_costs);
      fix_by_reduced_cost();
    }

    const double value = sign_ * lp.objective;
    if (config_.verify_bounds && std::isfinite(node.parent_lp) &&
        value > node.parent_lp + 1e-6 * std::max(1.0, std::abs(value))) {
      ++stats.bound_violations;
    }
    const double bound = node_bound(value);
    if (has_value_ && !improves(bound)) return;

    std::size_t j = pick_branch(lp.x, config_.integrality_tol);
    if (j != lp.x.size() && (!has_value_ || stats.nodes % 16 == 1)) {
      round_and_fill(lp.x);
      if (has_value_ && !improves(bound)) return;
    }
    if (j == lp.x.size()) {
      std::vector<std::int64_t> rounded(lp.x.size());
      for (std::size_t i = 0; i < lp.x.size(); ++i) {
        rounded[i] = static_cast<std::int64_t>(std::llround(lp.x[i]));
      }
      if (feasible(model_, rounded, config_.feasibility_tol)) {
        const double v = sign_ * objective_value(model_, rounded);
        if (!has_value_ || v > incumbent_value_) {
          incumbent_ = std::move(rounded);
          incumbent_value_ = v;
          has_value_ = true;
          fix_by_reduced_cost();
        }
        return;
      }
      // Rounding broke a row; keep branching on any non-integral value.
      j = pick_branch(lp.x, 0.0);
      if (j == lp.x.size()) return;
    }

    const double split = std::floor(lp.x[j]);
    double lo = root_lower_[j], hi = root_upper_[j];
    for (const BoundChange& c : node.changes) {
      if (c.var == j) {
        lo = c.lower;
        hi = c.upper;
      }
    }
    // While diving the round-down child is popped first.
    if (split + 1.0 <= hi) {
      Node up{node.changes, bound, value, next_seq_++};
      up.changes.push_back({j, split + 1.0, hi});
      stack.push_back(std::move(up));
    }
    if (split >= lo) {
      Node down{node.changes, bound, value, next_seq_++};
      down.changes.push_back({j, lo, split});
      stack.push_back(std::move(down));
    }
  }

  const IlpModel& model_;
  SolverConfig config_;
  const Clock::time_point start_;
  const std::size_t depth_;
  const double sign_;
  const bool integral_objective_;
  DenseSimplex lp_;
  std::vector<double> root_lower_, root_upper_, lower_, upper_;
  std::optional<std::vector<std::int64_t>> incumbent_;
  // Either the incumbent's value or, in a reduced search, the value to beat.
  double incumbent_value_ = -kInf;
  bool has_value_ = false;
  std::size_t free_count_ = 0;
  double root_value_ = kInf;
  std::vector<double> root_x_, root_d_;
  std::vector<std::size_t> fill_order_;
  std::size_t next_seq_ = 1;
};

}  // namespace

SolveResult BranchAndBoundSolver::solve(const IlpModel& model,
                                        const SolverConfig& config) const {
  if (!(config.integrality_tol > 0.0) || !(config.feasibility_tol > 0.0) ||
      !(config.relative_gap >= 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  require_bounded(model);
  const IlpModel presolved = fix_dominated_columns(model);
  Search search(presolved, config, Clock::now());
  return search.run();
}

SolveResult BruteForceSolver::solve(const IlpModel& model,
                                    const SolverConfig& config) const {
  require_bounded(model);
  const auto start = Clock::now();
  const std::size_t n = model.num_variables();
  SolveResult result;
  double points = 1.0;
  for (const Variable& v : model.variables) {
    if (*v.upper < v.lower) {
      result.stats.wall_ms = elapsed_ms(start);
      return result;
    }
    points *= static_cast<double>(*v.upper - v.lower + 1);
  }
  if (points > kMaxPoints) {
    throw LimitError("brute force: search space of " + std::to_string(points) +
                     " points exceeds the limit of 1e7");
  }

  const double sign = model.direction == Direction::kMaximize ? 1.0 : -1.0;
  const std::size_t m = model.constraints.size();
  std::vector<std::int64_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = model.variables[i].lower;
  std::vector<double> sums(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      sums[r] += model.constraints[r].coefficients[i] *
                 static_cast<double>(x[i]);
    }
  }

  std::optional<std::vector<std::int64_t>> best;
  double best_value = -kInf;
  while (true) {
    ++result.stats.nodes;
    bool plausible = true;
    for (std::size_t r = 0; r < m && plausible; ++r) {
      const LinearConstraint& row = model.constraints[r];
      const double slack = 1e-7 * (1.0 + std::abs(row.rhs));
      switch (row.sense) {
        case RowSense::kLe: plausible = sums[r] <= row.rhs + slack; break;
        case RowSense::kGe: plausible = sums[r] >= row.rhs - slack; break;
        case RowSense::kEq:
          plausible = std::abs(sums[r] - row.rhs) <= slack;
          break;
      }
    }
    if (plausible && feasible(model, x, config.feasibility_tol)) {
      const double v = sign * objective_value(model, x);
      if (!best || v > best_value) {
        best = x;
        best_value = v;
      }
    }
    std::size_t i = 0;
    for (; i < n; ++i) {
      const Variable& var = model.variables[i];
      if (x[i] < *var.upper) {
        ++x[i];
        for (std::size_t r = 0; r < m; ++r) {
          sums[r] += model.constraints[r].coefficients[i];
        }
        break;
      }
      const double span = static_cast<double>(x[i] - var.lower);
      for (std::size_t r = 0; r < m; ++r) {
        sums[r] -= model.constraints[r].coefficients[i] * span;
      }
      x[i] = var.lower;
    }
    if (i == n) break;
  }

  result.stats.wall_ms = elapsed_ms(start);
  if (best) {
    result.status = SolveStatus::kOptimal;
    result.objective = objective_value(model, *best);
    result.solution = std::move(best);
  }
  return result;
}

SolveResult solve(const IlpModel& model, const SolverConfig& config) {
  return BranchAndBoundSolver().solve(model, config);
}

SolveResult brute_force(const IlpModel& model) {
  return BruteForceSolver().solve(model, SolverConfig{});
}

std::unique_ptr<Solver> make_solver(std::string_view name) {
  if (name == "branch-and-bound" || name == "bnb") {
    return std::make_unique<BranchAndBoundSolver>();
  }
  if (name == "brute-force") return std::make_unique<BruteForceSolver>();
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

}  // namespace paql
