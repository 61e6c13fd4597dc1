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

// Bounded-variable primal simplex on a dense tableau.
//
// Package-query ILPs have one column per tuple and one row per global
// predicate, so the tableau is short and very wide. Every row gets a slack
// column (a_r x + s_r = b_r) whose bounds encode the row sense, which makes
// the all-slack basis a valid starting point. Phase 1 minimizes the sum of
// bound violations of basic variables; phase 2 optimizes the objective.
// Pricing is Dantzig's rule, switching to Bland's rule after a run of
// degenerate pivots.

#ifndef PAQL_SIMPLEX_HPP_
#define PAQL_SIMPLEX_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "paql/ilp.hpp"

namespace paql {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kSingular,
                      kIterationLimit };

std::string_view to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;   // structural values, meaningful when kOptimal
  double objective = 0.0;  // in the model's own direction
  // Per structural, when kOptimal: change of the minimized cost per unit
  // increase of x_j, where the minimized cost is the objective when
  // minimizing and its negation when maximizing.
  std::vector<double> reduced_costs;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t degenerate_switch = 50;
  std::size_t refactor_every = 100;
};

// Holds the tableau of one model between solves, so that a sequence of
// solves differing only in variable bounds restarts from the previous basis.
class DenseSimplex {
 public:
  explicit DenseSimplex(const IlpModel& model, SimplexOptions options = {});

  std::size_t num_rows() const { return m_; }
  std::size_t num_structurals() const { return n_; }

  // Solves max/min c x subject to the model rows and lower <= x <= upper.
  // `upper` entries may be +infinity; `lower` entries must be finite.
  LpResult solve(std::span<const double> lower, std::span<const double> upper);

  // Forgets the current basis; the next solve starts from all slacks.
  void reset();

 private:
  double& at(std::size_t r, std::size_t j) { return tableau_[r * cols_ + j]; }
  double value_of_nonbasic(std::size_t j) const;
  void restore_slack_basis();
  bool refactor();
  void recompute_beta();
  bool primal_feasible(std::size_t r) const;
  void pivot(std::size_t r, std::size_t j);

  SimplexOptions options_;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;        // m x n original rows
  std::vector<double> rhs_;
  std::vector<double> cost_;     // minimization form, length cols_
  bool maximize_ = true;
  std::vector<double> lb_, ub_;  // length cols_
  std::vector<double> tableau_;  // m x cols_, B^-1 [A | I]
  std::vector<double> beta_;     // basic values
  std::vector<std::size_t> head_;  // basic column of each row
  std::vector<char> basic_;
  std::vector<char> at_upper_;
};

// Continuous relaxation of the model with its own variable bounds.
LpResult lp_relax(const IlpModel& model);

}  // namespace paql

#endif  // PAQL_SIMPLEX_HPP_
