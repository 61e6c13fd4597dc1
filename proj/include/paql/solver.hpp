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

// Exact ILP solving: branch-and-bound over the simplex relaxation (depth-first
// dives, best-bound once an incumbent exists) and exhaustive enumeration.

#ifndef PAQL_SOLVER_HPP_
#define PAQL_SOLVER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paql/ilp.hpp"
#include "paql/simplex.hpp"

namespace paql {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kTimeLimit };

std::string_view to_string(SolveStatus status);

struct SolveStats {
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  double wall_ms = 0.0;
  // Nodes whose relaxation bound was better than their parent's. Only
  // counted when SolverConfig::verify_bounds is set.
  std::size_t bound_violations = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kInfeasible;
  // Present for kOptimal, and for kTimeLimit when an incumbent exists.
  std::optional<std::vector<std::int64_t>> solution;
  std::optional<double> objective;
  SolveStats stats;
};

struct SolverConfig {
  double time_limit_s = 3600.0;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-9;
  // Search stops with kTimeLimit after this many nodes.
  std::optional<std::size_t> node_limit;
  // Nodes whose bound is within relative_gap * |incumbent| of the incumbent
  // are pruned, so kOptimal means optimal up to that gap. 0 is exact.
  double relative_gap = 0.0;
  // Kept for interface stability; the branching rule is deterministic and
  // does not consume randomness.
  std::uint64_t seed = 0;
#ifdef NDEBUG
  bool verify_bounds = false;
#else
  bool verify_bounds = true;
#endif
};

class Solver {
 public:
  virtual ~Solver() = default;
  virtual std::string name() const = 0;
  // Requires finite variable upper bounds; throws UnboundedError otherwise.
  virtual SolveResult solve(const IlpModel& model,
                            const SolverConfig& config) const = 0;
};

class BranchAndBoundSolver : public Solver {
 public:
  std::string name() const override { return "branch-and-bound"; }
  SolveResult solve(const IlpModel& model,
                    const SolverConfig& config) const override;
};

// Enumerates every integer point in the variable box.
class BruteForceSolver : public Solver {
 public:
  static constexpr double kMaxPoints = 1e7;

  std::string name() const override { return "brute-force"; }
  // Throws LimitError when the box has more than kMaxPoints points.
  SolveResult solve(const IlpModel& model,
                    const SolverConfig& config) const override;
};

SolveResult solve(const IlpModel& model, const SolverConfig& config = {});
SolveResult brute_force(const IlpModel& model);

std::unique_ptr<Solver> make_solver(std::string_view name);

}  // namespace paql

#endif  // PAQL_SOLVER_HPP_
