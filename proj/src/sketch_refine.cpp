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

// SketchRefine.
//
// Every level works on a "local" relation whose tuples are the candidates of
// that level, with an optional multiplicity cap per tuple. Queries at this
// level carry neither a base predicate (applied once, up front) nor REPEAT
// (already folded into the caps). A level solves its sketch over one
// representative per group, then refines groups one at a time; any
// subproblem larger than the recursion threshold is again solved this way
// after quad-tree partitioning it on the query attributes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>

#include "paql/error.hpp"
#include "paql/evaluator.hpp"

namespace paql {

namespace {

using Clock = std::chrono::steady_clock;
using Caps = std::vector<std::optional<std::int64_t>>;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

enum class Outcome { kFeasible, kInfeasible, kTimeLimit, kBudget };

struct SubResult {
  Outcome outcome = Outcome::kInfeasible;
  std::vector<std::int64_t> x;  // aligned with the candidate list
};

PackageQuery strip(const PackageQuery& q) {
  PackageQuery out = q;
  out.base_predicate.reset();
  out.repeat.reset();
  return out;
}

// One row per group: numeric attributes are member means, categorical ones
// the most frequent label (lexicographically smallest on ties).
Relation representative_relation(const Relation& rel,
                                 const std::vector<std::vector<TupleId>>& groups) {
  const Schema& schema = rel.schema();
  std::vector<Column> columns(schema.arity());
  for (std::size_t a = 0; a < schema.arity(); ++a) {
    for (const auto& group : groups) {
      if (schema.attribute(a).kind == AttributeKind::kNumeric) {
        long double sum = 0.0L;
        for (TupleId id : group) sum += rel.numeric(a, id);
        columns[a].numbers.push_back(
            group.empty() ? 0.0
                          : static_cast<double>(sum / static_cast<long double>(
                                                          group.size())));
      } else {
        std::map<std::string, std::size_t> counts;
        for (TupleId id : group) ++counts[rel.categorical(a, id)];
        std::string best;
        std::size_t best_count = 0;
        for (const auto& [label, c] : counts) {
          if (c > best_count) {
            best = label;
            best_count = c;
          }
        }
        columns[a].labels.push_back(best);
      }
    }
  }
  return Relation(Schema(schema.name() + "_representatives",
                         schema.attributes()),
                  std::move(columns));
}

// Rows of `a` followed by rows of `b`; both share a schema.
Relation concat(const Relation& a, const Relation& b) {
  const Schema& schema = a.schema();
  std::vector<Column> columns(schema.arity());
  for (std::size_t k = 0; k < schema.arity(); ++k) {
    columns[k] = a.column(k);
    const Column& more = b.column(k);
    columns[k].numbers.insert(columns[k].numbers.end(), more.numbers.begin(),
                              more.numbers.end());
    columns[k].labels.insert(columns[k].labels.end(), more.labels.begin(),
                             more.labels.end());
  }
  return Relation(schema, std::move(columns));
}

std::vector<std::string> numeric_query_attributes(const PackageQuery& q,
                                                  const Schema& schema) {
  std::vector<std::string> out;
  for (const std::string& name : query_attributes(q)) {
    const auto index = schema.index_of(name);
    if (index && schema.attribute(*index).kind == AttributeKind::kNumeric) {
      out.push_back(name);
    }
  }
  return out;
}

struct Context {
  const EvalConfig& config;
  const Solver& solver;
  Clock::time_point start;
  std::size_t threshold;
  std::mt19937_64 rng;
  EvalReport& report;
  bool nested_budget_hit = false;

  double remaining_s() const {
    return config.solver.time_limit_s - ms_since(start) / 1000.0;
  }
};

SubResult solve_sub(Context& ctx, const PackageQuery& q, const Relation& rel,
                    const std::vector<TupleId>& ids, const Caps& caps,
                    std::size_t depth);

SubResult solve_direct(Context& ctx, const PackageQuery& q,
                       const Relation& rel, const std::vector<TupleId>& ids,
                       const Caps& caps) {
  SubResult out;
  const double remaining = ctx.remaining_s();
  if (remaining <= 0.0) {
    out.outcome = Outcome::kTimeLimit;
    return out;
  }
  const auto t0 = Clock::now();
  IlpModel model = translate(q, rel, ids);
  for (std::size_t i = 0; i < ids.size(); ++i) model.variables[i].upper = caps[i];
  model = derive_bounds(std::move(model));
  ctx.report.timings.translate_ms += ms_since(t0);

  SolverConfig config = ctx.config.solver;
  config.time_limit_s = remaining;
  const auto t1 = Clock::now();
  const SolveResult result = ctx.solver.solve(model, config);
  ctx.report.timings.solve_ms += ms_since(t1);
  ++ctx.report.subproblems;
  switch (result.status) {
    case SolveStatus::kOptimal:
      out.outcome = Outcome::kFeasible;
      out.x = *result.solution;
      break;
    case SolveStatus::kInfeasible:
      out.outcome = Outcome::kInfeasible;
      break;
    case SolveStatus::kTimeLimit:
      out.outcome = Outcome::kTimeLimit;
      break;
    case SolveStatus::kUnbounded:
      throw UnboundedError("unbounded: solver reported an unbounded model");
  }
  return out;
}

// Greedy backtracking refinement over one level's groups.
class Refiner {
 public:
  Refiner(Context& ctx, const PackageQuery& q, const Relation& rel,
          const Caps& caps, const std::vector<std::vector<TupleId>>& groups,
          const Relation& reps, std::size_t depth, std::size_t budget,
          bool top)
      : ctx_(ctx),
        q_(q),
        rel_(rel),
        caps_(caps),
        groups_(groups),
        depth_(depth),
        budget_(budget),
        top_(top),
        sketch_(groups.size(), 0),
        refined_(groups.size()),
        done_(groups.size(), 0) {
    for (const GlobalPredicate& g : q.global_predicates) {
      forms_.push_back(LinearForm::of_predicate(g, rel.schema()));
    }
    rep_coef_.assign(groups.size(), std::vector<double>(forms_.size()));
    for (std::size_t j = 0; j < groups.size(); ++j) {
      for (std::size_t p = 0; p < forms_.size(); ++p) {
        rep_coef_[j][p] = forms_[p].coefficient(reps, j);
      }
    }
  }

  void set_sketch(std::size_t group, std::int64_t mult) { sketch_[group] = mult; }

  void fix_group(std::size_t group,
                 std::vector<std::pair<TupleId, std::int64_t>> tuples) {
    refined_[group] = std::move(tuples);
    done_[group] = 1;
    sketch_[group] = 0;
  }

  Outcome run() { return refine(true); }

  // Multiplicities over the local relation.
  std::vector<std::int64_t> solution() const {
    std::vector<std::int64_t> x(rel_.size(), 0);
    for (const auto& entries : refined_) {
      for (const auto& [id, mult] : entries) x[id] += mult;
    }
    return x;
  }

  std::size_t backtracks() const { return backtracks_; }

 private:
  std::vector<double> partial_without(std::size_t group) const {
    std::vector<long double> total(forms_.size(), 0.0L);
    for (std::size_t k = 0; k < groups_.size(); ++k) {
      if (k == group) continue;
      if (done_[k]) {
        for (const auto& [id, mult] : refined_[k]) {
          for (std::size_t p = 0; p < forms_.size(); ++p) {
            total[p] += static_cast<long double>(forms_[p].coefficient(rel_, id)) *
                        mult;
          }
        }
      } else if (sketch_[k] > 0) {
        for (std::size_t p = 0; p < forms_.size(); ++p) {
          total[p] += static_cast<long double>(rep_coef_[k][p]) * sketch_[k];
        }
      }
    }
    return {total.begin(), total.end()};
  }

  void prioritize(std::deque<std::size_t>& queue,
                  const std::vector<std::size_t>& failed) const {
    // Oldest failure first, so the most recent one ends up in front.
    for (std::size_t f : failed) {
      const auto it = std::find(queue.begin(), queue.end(), f);
      if (it == queue.end()) continue;
      queue.erase(it);
      queue.push_front(f);
    }
  }

  static void merge(std::vector<std::size_t>& into,
                    const std::vector<std::size_t>& more) {
    for (std::size_t f : more) {
      const auto it = std::find(into.begin(), into.end(), f);
      if (it != into.end()) into.erase(it);
      into.push_back(f);
    }
  }

  Outcome refine(bool root) {
    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < groups_.size(); ++j) {
      if (!done_[j] && sketch_[j] > 0) pending.push_back(j);
    }
    if (pending.empty()) return Outcome::kFeasible;
    std::shuffle(pending.begin(), pending.end(), ctx_.rng);
    std::deque<std::size_t> queue(pending.begin(), pending.end());
    std::vector<std::size_t> failed;

    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (done_[j] || sketch_[j] == 0) continue;
      if (solves_ >= budget_) return Outcome::kBudget;
      ++solves_;
      if (top_) ++ctx_.report.refine_solves;

      const std::vector<double> partial = partial_without(j);
      const PackageQuery rq = build_refine_query(q_, partial);
      Caps caps;
      for (TupleId id : groups_[j]) caps.push_back(caps_[id]);
      SubResult r = solve_sub(ctx_, rq, rel_, groups_[j], caps, depth_ + 1);
      if (r.outcome == Outcome::kTimeLimit) return r.outcome;

      if (r.outcome != Outcome::kFeasible) {
        if (!root) {
          merge(failed, {j});
          last_failed_ = std::move(failed);
          return Outcome::kInfeasible;
        }
        continue;
      }

      std::vector<std::pair<TupleId, std::int64_t>> chosen;
      for (std::size_t i = 0; i < groups_[j].size(); ++i) {
        if (r.x[i] > 0) chosen.emplace_back(groups_[j][i], r.x[i]);
      }
      const std::int64_t saved = sketch_[j];
      fix_group(j, std::move(chosen));
      const Outcome child = refine(false);
      if (child == Outcome::kFeasible || child == Outcome::kTimeLimit ||
          child == Outcome::kBudget) {
        return child;
      }
      // Undo and try the next group, failed groups first.
      done_[j] = 0;
      refined_[j].clear();
      sketch_[j] = saved;
      ++backtracks_;
      if (top_) ++ctx_.report.backtracks;
      merge(failed, last_failed_);
      prioritize(queue, failed);
    }
    last_failed_ = std::move(failed);
    return Outcome::kInfeasible;
  }

  Context& ctx_;
  const PackageQuery& q_;
  const Relation& rel_;
  const Caps& caps_;
  const std::vector<std::vector<TupleId>>& groups_;
  const std::size_t depth_;
  const std::size_t budget_;
  const bool top_;
  std::vector<LinearForm> forms_;
  std::vector<std::vector<double>> rep_coef_;
  std::vector<std::int64_t> sketch_;
  std::vector<std::vector<std::pair<TupleId, std::int64_t>>> refined_;
  std::vector<char> done_;
  std::vector<std::size_t> last_failed_;
  std::size_t solves_ = 0;
  std::size_t backtracks_ = 0;
};

Caps representative_caps(const Caps& caps,
                         const std::vector<std::vector<TupleId>>& groups) {
  Caps out;
  for (const auto& group : groups) {
    std::optional<std::int64_t> total = 0;
    for (TupleId id : group) {
      if (!caps[id]) {
        total.reset();
        break;
      }
      *total += *caps[id];
    }
    out.push_back(total);
  }
  return out;
}

struct HybridResult {
  std::size_t group = 0;
  std::vector<std::pair<TupleId, std::int64_t>> tuples;  // local ids
  std::vector<std::int64_t> sketch;                      // per group
};

// Returns nullopt when every group fails; sets `timed_out` when the time
// budget ran out first.
std::optional<HybridResult> run_hybrid(
    Context& ctx, const PackageQuery& q, const Relation& rel, const Caps& caps,
    const std::vector<std::vector<TupleId>>& groups, const Relation& reps,
    const Caps& rep_caps, std::size_t depth, bool& timed_out) {
  const std::size_t m = groups.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), ctx.rng);
  timed_out = false;
  for (std::size_t g : order) {
    std::vector<TupleId> others;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != g) others.push_back(k);
    }
    const Relation mixed = concat(rel.select(groups[g]), reps.select(others));
    Caps mixed_caps;
    for (TupleId id : groups[g]) mixed_caps.push_back(caps[id]);
    for (std::size_t k : others) mixed_caps.push_back(rep_caps[k]);
    std::vector<TupleId> ids(mixed.size());
    std::iota(ids.begin(), ids.end(), 0);
    const SubResult r = solve_sub(ctx, q, mixed, ids, mixed_caps, depth + 1);
    if (r.outcome == Outcome::kTimeLimit) {
      timed_out = true;
      return std::nullopt;
    }
    if (r.outcome != Outcome::kFeasible) continue;
    HybridResult out;
    out.group = g;
    out.sketch.assign(m, 0);
    for (std::size_t i = 0; i < groups[g].size(); ++i) {
      if (r.x[i] > 0) out.tuples.emplace_back(groups[g][i], r.x[i]);
    }
    for (std::size_t k = 0; k < others.size(); ++k) {
      out.sketch[others[k]] = r.x[groups[g].size() + k];
    }
    return out;
  }
  return std::nullopt;
}

// One SketchRefine level over the local relation `rel` (all of whose tuples
// belong to exactly one group).
SubResult sketch_refine_level(Context& ctx, const PackageQuery& q,
                              const Relation& rel, const Caps& caps,
                              const std::vector<std::vector<TupleId>>& groups,
                              std::size_t depth, std::size_t budget, bool top) {
  SubResult out;
  const std::size_t m = groups.size();
  const Relation reps = representative_relation(rel, groups);
  const Caps rep_caps = representative_caps(caps, groups);

  const auto t_sketch = Clock::now();
  // Top-level bookkeeping for the sketch phase, on every exit path.
  const auto sketch_done = [&](std::size_t used_groups) {
    if (!top) return;
    ctx.report.timings.sketch_ms = ms_since(t_sketch);
    ctx.report.sketch_groups = used_groups;
  };
  const auto nonzero = [](const std::vector<std::int64_t>& x) {
    return static_cast<std::size_t>(
        std::count_if(x.begin(), x.end(), [](std::int64_t v) { return v > 0; }));
  };
  std::vector<TupleId> rep_ids(m);
  std::iota(rep_ids.begin(), rep_ids.end(), 0);
  SubResult sketch = solve_sub(ctx, q, reps, rep_ids, rep_caps, depth + 1);
  if (sketch.outcome == Outcome::kTimeLimit) {
    sketch_done(0);
    out.outcome = Outcome::kTimeLimit;
    return out;
  }

  Refiner refiner(ctx, q, rel, caps, groups, reps, depth, budget, top);
  if (sketch.outcome == Outcome::kFeasible) {
    for (std::size_t j = 0; j < m; ++j) refiner.set_sketch(j, sketch.x[j]);
    sketch_done(nonzero(sketch.x));
  } else {
    if (!ctx.config.hybrid_sketch) {
      sketch_done(0);
      out.outcome = Outcome::kInfeasible;
      return out;
    }
    bool timed_out = false;
    std::optional<HybridResult> hybrid =
        run_hybrid(ctx, q, rel, caps, groups, reps, rep_caps, depth, timed_out);
    if (timed_out || !hybrid) {
      sketch_done(0);
      out.outcome = timed_out ? Outcome::kTimeLimit : Outcome::kInfeasible;
      return out;
    }
    if (top) ctx.report.flags.push_back(kFlagHybridSketch);
    for (std::size_t j = 0; j < m; ++j) refiner.set_sketch(j, hybrid->sketch[j]);
    sketch_done(nonzero(hybrid->sketch) + (hybrid->tuples.empty() ? 0 : 1));
    refiner.fix_group(hybrid->group, std::move(hybrid->tuples));
  }

  const auto t_refine = Clock::now();
  out.outcome = refiner.run();
  if (top) ctx.report.timings.refine_ms = ms_since(t_refine);
  if (out.outcome == Outcome::kFeasible) out.x = refiner.solution();
  return out;
}

SubResult solve_sub(Context& ctx, const PackageQuery& q, const Relation& rel,
                    const std::vector<TupleId>& ids, const Caps& caps,
                    std::size_t depth) {
  if (ids.size() > ctx.threshold && depth < ctx.config.max_recursion_depth) {
    const std::vector<std::string> attrs =
        numeric_query_attributes(q, rel.schema());
    if (!attrs.empty()) {
      const Relation local = rel.select(ids);
      const Partitioning p =
          partition(local, {attrs, std::max<std::size_t>(ctx.threshold, 1),
                            kNoRadiusLimit});
      if (p.num_groups() > 1) {
        SubResult r = sketch_refine_level(ctx, q, local, caps, p.members, depth,
                                          10 * p.num_groups(), false);
        if (r.outcome == Outcome::kBudget) {
          ctx.nested_budget_hit = true;
          r.outcome = Outcome::kInfeasible;
        }
        return r;
      }
    }
  }
  return solve_direct(ctx, q, rel, ids, caps);
}

// Base-filtered, partitioning-covered view of the input.
struct Prepared {
  PackageQuery query;     // validated
  PackageQuery internal;  // no base predicate, no REPEAT
  std::vector<TupleId> survivors;  // local id -> input id
  Relation local;
  std::vector<std::vector<TupleId>> groups;  // local ids
  std::vector<std::size_t> group_index;      // local group -> input group
  Caps caps;
};

Prepared prepare(const PackageQuery& query, const Relation& relation,
                 const Partitioning& partitioning) {
  Prepared out;
  out.query = query.validated ? query : validate(query, relation.schema());
  out.internal = strip(out.query);
  if (partitioning.gid.size() != relation.size()) {
    throw ValidationError("partitioning covers " +
                          std::to_string(partitioning.gid.size()) +
                          " tuples but the relation has " +
                          std::to_string(relation.size()));
  }
  std::vector<std::size_t> local_of(relation.size(), Partitioning::kUnassigned);
  for (TupleId id = 0; id < relation.size(); ++id) {
    if (partitioning.gid[id] == Partitioning::kUnassigned) continue;
    if (out.query.base_predicate &&
        !satisfies(relation, id, *out.query.base_predicate)) {
      continue;
    }
    local_of[id] = out.survivors.size();
    out.survivors.push_back(id);
  }
  out.local = relation.select(out.survivors);
  for (std::size_t j = 0; j < partitioning.num_groups(); ++j) {
    std::vector<TupleId> members;
    for (TupleId id : partitioning.members[j]) {
      if (id < relation.size() && local_of[id] != Partitioning::kUnassigned) {
        members.push_back(local_of[id]);
      }
    }
    if (members.empty()) continue;
    out.groups.push_back(std::move(members));
    out.group_index.push_back(j);
  }
  out.caps.assign(out.survivors.size(), out.query.max_multiplicity());
  return out;
}

}  // namespace

SketchQuery build_sketch_query(const PackageQuery& query,
                               const Relation& relation,
                               const Partitioning& partitioning) {
  Prepared prep = prepare(query, relation, partitioning);
  SketchQuery out;
  out.representatives = representative_relation(prep.local, prep.groups);
  out.query = prep.internal;
  out.query.relation_name = out.representatives.name();
  out.capacities = representative_caps(prep.caps, prep.groups);
  return out;
}

std::optional<HybridSketch> hybrid_sketch(const PackageQuery& query,
                                          const Relation& relation,
                                          const Partitioning& partitioning,
                                          const EvalConfig& config) {
  Prepared prep = prepare(query, relation, partitioning);
  EvalReport scratch;
  const BranchAndBoundSolver fallback;
  Context ctx{config,
              config.solver_impl ? *config.solver_impl : fallback,
              Clock::now(),
              config.recursion_threshold.value_or(partitioning.tau),
              std::mt19937_64(config.seed),
              scratch};
  const Relation reps = representative_relation(prep.local, prep.groups);
  const Caps rep_caps = representative_caps(prep.caps, prep.groups);
  bool timed_out = false;
  std::optional<HybridResult> r =
      run_hybrid(ctx, prep.internal, prep.local, prep.caps, prep.groups, reps,
                 rep_caps, 0, timed_out);
  if (!r) return std::nullopt;
  HybridSketch out;
  out.group = prep.group_index[r->group];
  for (const auto& [id, mult] : r->tuples) {
    out.tuples[prep.survivors[id]] = mult;
  }
  out.representative_multiplicities.assign(partitioning.num_groups(), 0);
  for (std::size_t j = 0; j < r->sketch.size(); ++j) {
    out.representative_multiplicities[prep.group_index[j]] = r->sketch[j];
  }
  return out;
}

EvalReport eval_sketchrefine(const PackageQuery& query,
                             const Relation& relation,
                             const Partitioning& partitioning,
                             const EvalConfig& config) {
  const auto start = Clock::now();
  EvalReport report;
  report.method = Method::kSketchRefine;
  Prepared prep = prepare(query, relation, partitioning);

  for (const std::string& attr :
       numeric_query_attributes(prep.query, relation.schema())) {
    if (std::find(partitioning.attrs.begin(), partitioning.attrs.end(), attr) ==
        partitioning.attrs.end()) {
      report.flags.push_back(kFlagPartialCoverage);
      break;
    }
  }
  if (!partitioning.degenerate.empty()) {
    report.flags.push_back(kFlagDegenerateGroups);
  }

  const BranchAndBoundSolver fallback;
  Context ctx{config,
              config.solver_impl ? *config.solver_impl : fallback,
              start,
              config.recursion_threshold.value_or(partitioning.tau),
              std::mt19937_64(config.seed),
              report};
  const std::size_t budget =
      config.backtrack_limit.value_or(10 * std::max<std::size_t>(
                                               prep.groups.size(), 1));
  const SubResult r = sketch_refine_level(ctx, prep.internal, prep.local,
                                          prep.caps, prep.groups, 0, budget,
                                          true);
  report.timings.total_ms = ms_since(start);

  switch (r.outcome) {
    case Outcome::kFeasible: report.status = EvalStatus::kFeasible; break;
    case Outcome::kInfeasible: report.status = EvalStatus::kInfeasible; break;
    case Outcome::kTimeLimit: report.status = EvalStatus::kTimeLimit; break;
    case Outcome::kBudget:
      report.status = EvalStatus::kInfeasible;
      report.flags.push_back(kFlagBacktrackLimit);
      break;
  }
  if (ctx.nested_budget_hit && !report.has_flag(kFlagBacktrackLimit)) {
    report.flags.push_back(kFlagBacktrackLimit);
  }
  if (r.outcome != Outcome::kFeasible) return report;

  Package package;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    if (r.x[i] > 0) package.entries[prep.survivors[i]] = r.x[i];
  }
  if (prep.query.objective) {
    package.objective_value =
        aggregate(prep.query.objective->expr, relation, package);
  }
  if (!package_satisfies(prep.query, relation, package)) {
    report.status = EvalStatus::kInfeasible;
    report.flags.push_back(kFlagVerificationFailed);
    return report;
  }
  report.package = std::move(package);
  return report;
}

}  // namespace paql
