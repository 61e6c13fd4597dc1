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

#include "paql/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "paql/error.hpp"

namespace paql {

std::string_view to_string(Sweep sweep) {
  switch (sweep) {
    case Sweep::kScale: return "scale";
    case Sweep::kTau: return "tau";
    case Sweep::kCoverage: return "coverage";
  }
  return "?";
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

namespace {

double mean(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

std::size_t tau_for(double fraction, std::size_t n) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

// Partitioning over relation.select(kept), built from one over the full
// relation that assigns exactly the kept tuples.
Partitioning reindex(const Partitioning& p, const std::vector<TupleId>& kept) {
  Partitioning out = p;
  std::vector<std::size_t> local(p.gid.size(), Partitioning::kUnassigned);
  for (std::size_t i = 0; i < kept.size(); ++i) local[kept[i]] = i;
  out.gid.assign(kept.size(), Partitioning::kUnassigned);
  for (std::size_t i = 0; i < kept.size(); ++i) out.gid[i] = p.gid[kept[i]];
  for (auto& members : out.members) {
    for (TupleId& id : members) id = local[id];
  }
  return out;
}

struct Run {
  double ms = 0.0;
  bool feasible = false;
  std::optional<double> objective;
  std::string error;
};

Run run_once(Method method, const PackageQuery& q, const Relation& rel,
             const Partitioning* p, const EvalConfig& config) {
  Run run;
  try {
    const EvalReport r = method == Method::kDirect
                             ? eval_direct(q, rel, config)
                             : eval_sketchrefine(q, rel, *p, config);
    run.ms = r.timings.total_ms;
    run.feasible = r.status == EvalStatus::kFeasible && r.package.has_value();
    if (run.feasible) run.objective = r.package->objective_value;
    if (!run.feasible) run.error = std::string(to_string(r.status));
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

std::optional<double> ratio(Direction direction, double direct, double sr) {
  const double num = direction == Direction::kMaximize ? direct : sr;
  const double den = direction == Direction::kMaximize ? sr : direct;
  if (den == 0.0) {
    if (num == 0.0) return 1.0;
    return std::nullopt;
  }
  return num / den;
}

class Bench {
 public:
  Bench(const Relation& relation, const BenchSpec& spec)
      : relation_(relation), spec_(spec) {
    for (const Attribute& a : relation.schema().attributes()) {
      if (a.kind == AttributeKind::kNumeric) numeric_.push_back(a.name);
    }
  }

  BenchReport run() {
    report_.sweep = spec_.sweep;
    switch (spec_.sweep) {
      case Sweep::kScale: scale_sweep(); break;
      case Sweep::kTau: tau_sweep(); break;
      case Sweep::kCoverage: coverage_sweep(); break;
    }
    for (const BenchQuery& bq : spec_.queries) {
      const std::vector<double>& r = all_ratios_[bq.name];
      BenchQuerySummary s{bq.name, std::nullopt, std::nullopt};
      if (!r.empty()) {
        s.mean_ratio = mean(r);
        s.median_ratio = median(r);
      }
      report_.summaries.push_back(std::move(s));
    }
    return std::move(report_);
  }

 private:
  bool wants(Method m) const {
    return std::find(spec_.methods.begin(), spec_.methods.end(), m) !=
           spec_.methods.end();
  }

  Direction direction_of(const PackageQuery& q) const {
    return q.objective ? q.objective->direction : Direction::kMaximize;
  }

  Partitioning build(const Relation& rel, std::vector<std::string> attrs,
                     std::size_t tau, Direction direction) const {
    if (attrs.empty()) attrs = spec_.attrs.empty() ? numeric_ : spec_.attrs;
    if (spec_.epsilon) {
      return partition_for_epsilon(rel, std::move(attrs), tau, *spec_.epsilon,
                                   direction);
    }
    return partition(rel, {std::move(attrs), tau, spec_.omega});
  }

  std::vector<Run> repeat(Method method, const PackageQuery& q,
                          const Relation& rel, const Partitioning* p) const {
    std::vector<Run> runs;
    for (std::size_t r = 0; r < spec_.repetitions; ++r) {
      EvalConfig config = spec_.config;
      config.seed = spec_.config.seed + r;
      runs.push_back(run_once(method, q, rel, p, config));
    }
    return runs;
  }

  BenchRow summarize(const std::string& name, Method method, double scale,
                     const std::vector<Run>& runs, Direction direction,
                     std::optional<double> direct_objective) {
    BenchRow row;
    row.query = name;
    row.method = method;
    row.scale = scale;
    row.runs = runs.size();
    std::vector<double> times;
    std::vector<double> ratios;
    for (const Run& run : runs) {
      times.push_back(run.ms);
      if (!run.feasible) {
        ++row.failures;
        if (std::find(row.errors.begin(), row.errors.end(), run.error) ==
            row.errors.end()) {
          row.errors.push_back(run.error);
        }
        continue;
      }
      if (method == Method::kSketchRefine && direct_objective) {
        if (auto r = ratio(direction, *direct_objective, *run.objective)) {
          ratios.push_back(*r);
        }
      }
    }
    row.mean_ms = mean(times);
    row.median_ms = median(times);
    if (!ratios.empty()) {
      row.mean_ratio = mean(ratios);
      row.median_ratio = median(ratios);
      auto& all = all_ratios_[name];
      all.insert(all.end(), ratios.begin(), ratios.end());
    }
    return row;
  }

  static std::optional<double> first_objective(const std::vector<Run>& runs) {
    for (const Run& run : runs) {
      if (run.feasible) return run.objective;
    }
    return std::nullopt;
  }

  void scale_sweep() {
    for (double f : spec_.scales) {
      if (!(f > 0.0 && f <= 1.0)) {
        throw ValidationError("scale fractions must lie in (0, 1]");
      }
    }
    const std::size_t tau =
        spec_.tau.value_or(tau_for(spec_.tau_fractions.at(0), relation_.size()));
    std::map<Direction, Partitioning> base;
    auto base_for = [&](Direction d) -> const Partitioning& {
      if (spec_.partitioning) return *spec_.partitioning;
      auto it = base.find(d);
      if (it == base.end()) it = base.emplace(d, build(relation_, {}, tau, d)).first;
      return it->second;
    };
    for (double f : spec_.scales) {
      for (const BenchQuery& bq : spec_.queries) {
        const Direction d = direction_of(bq.query);
        const Partitioning* full =
            wants(Method::kSketchRefine) ? &base_for(d) : nullptr;
        Relation rel = relation_;
        std::optional<Partitioning> local;
        if (f < 1.0) {
          // Same seed for every query so the whole workload sees one sample.
          const Partitioning& shape =
              full ? *full : base_for(d);
          const Partitioning shrunk =
              shrink_for_scaling(shape, relation_, f, spec_.config.seed);
          std::vector<TupleId> kept;
          for (TupleId id = 0; id < shrunk.gid.size(); ++id) {
            if (shrunk.gid[id] != Partitioning::kUnassigned) kept.push_back(id);
          }
          rel = relation_.select(kept);
          local = reindex(shrunk, kept);
        } else if (full) {
          local = *full;
        }
        run_point(bq, f, rel, local ? &*local : nullptr);
      }
    }
  }

  void run_point(const BenchQuery& bq, double value, const Relation& rel,
                 const Partitioning* p) {
    const Direction d = direction_of(bq.query);
    std::optional<double> direct_objective;
    if (wants(Method::kDirect)) {
      const std::vector<Run> runs = repeat(Method::kDirect, bq.query, rel, nullptr);
      direct_objective = first_objective(runs);
      report_.rows.push_back(
          summarize(bq.name, Method::kDirect, value, runs, d, std::nullopt));
    }
    if (wants(Method::kSketchRefine)) {
      const std::vector<Run> runs = repeat(Method::kSketchRefine, bq.query, rel, p);
      report_.rows.push_back(summarize(bq.name, Method::kSketchRefine, value,
                                       runs, d, direct_objective));
    }
  }

  // Direct does not depend on the partitioning: it runs once per query and
  // its objective is the reference for every SketchRefine point.
  std::optional<double> direct_reference(const BenchQuery& bq) {
    if (!wants(Method::kDirect)) return std::nullopt;
    const std::vector<Run> runs =
        repeat(Method::kDirect, bq.query, relation_, nullptr);
    report_.rows.push_back(summarize(bq.name, Method::kDirect, 1.0, runs,
                                     direction_of(bq.query), std::nullopt));
    return first_objective(runs);
  }

  void tau_sweep() {
    for (double t : spec_.tau_fractions) {
      if (!(t > 0.0 && t <= 1.0)) {
        throw ValidationError("tau fractions must lie in (0, 1]");
      }
    }
    for (const BenchQuery& bq : spec_.queries) {
      const std::optional<double> reference = direct_reference(bq);
      if (!wants(Method::kSketchRefine)) continue;
      const Direction d = direction_of(bq.query);
      for (double t : spec_.tau_fractions) {
        std::vector<Run> runs;
        try {
          const Partitioning p = build(relation_, {}, tau_for(t, relation_.size()), d);
          runs = repeat(Method::kSketchRefine, bq.query, relation_, &p);
        } catch (const std::exception& e) {
          runs.assign(1, Run{0.0, false, std::nullopt, e.what()});
        }
        report_.rows.push_back(
            summarize(bq.name, Method::kSketchRefine, t, runs, d, reference));
      }
    }
  }

  void coverage_sweep() {
    for (double c : spec_.coverages) {
      if (!(c > 0.0)) throw ValidationError("coverages must be positive");
    }
    const std::size_t tau =
        spec_.tau.value_or(tau_for(spec_.tau_fractions.at(0), relation_.size()));
    for (const BenchQuery& bq : spec_.queries) {
      const std::optional<double> reference = direct_reference(bq);
      if (!wants(Method::kSketchRefine)) continue;
      const Direction d = direction_of(bq.query);
      std::vector<std::string> ordered = query_attributes(
          bq.query.validated ? bq.query : validate(bq.query, relation_.schema()));
      const std::size_t q_attrs = std::max<std::size_t>(1, ordered.size());
      for (const std::string& a : numeric_) {
        if (std::find(ordered.begin(), ordered.end(), a) == ordered.end()) {
          ordered.push_back(a);
        }
      }
      const std::size_t first_row = report_.rows.size();
      std::optional<double> at_one;
      for (double c : spec_.coverages) {
        const std::size_t count = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(c * static_cast<double>(q_attrs))),
            1, ordered.size());
        std::vector<std::string> attrs(ordered.begin(), ordered.begin() + count);
        std::vector<Run> runs;
        try {
          const Partitioning p = build(relation_, attrs, tau, d);
          runs = repeat(Method::kSketchRefine, bq.query, relation_, &p);
        } catch (const std::exception& e) {
          runs.assign(1, Run{0.0, false, std::nullopt, e.what()});
        }
        report_.rows.push_back(
            summarize(bq.name, Method::kSketchRefine, c, runs, d, reference));
        if (c == 1.0) at_one = report_.rows.back().mean_ms;
      }
      if (at_one && *at_one > 0.0) {
        for (std::size_t i = first_row; i < report_.rows.size(); ++i) {
          report_.rows[i].time_ratio = report_.rows[i].mean_ms / *at_one;
        }
      }
    }
  }

  const Relation& relation_;
  const BenchSpec& spec_;
  std::vector<std::string> numeric_;
  BenchReport report_;
  std::map<std::string, std::vector<double>> all_ratios_;
};

}  // namespace

BenchReport run_bench(const Relation& relation, const BenchSpec& spec) {
  if (spec.queries.empty()) throw ValidationError("bench needs at least one query");
  if (spec.methods.empty()) throw ValidationError("bench needs at least one method");
  if (spec.repetitions == 0) throw ValidationError("repetitions must be positive");
  if (spec.tau && *spec.tau == 0) throw ValidationError("tau must be positive");
  if (spec.tau_fractions.empty()) throw ValidationError("no tau fraction given");
  return Bench(relation, spec).run();
}

std::string to_json(const BenchReport& report) {
  using nlohmann::ordered_json;
  const auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json doc;
  doc["sweep"] = std::string(to_string(report.sweep));
  ordered_json rows = ordered_json::array();
  for (const BenchRow& r : report.rows) {
    ordered_json row;
    row["query"] = r.query;
    row["method"] = std::string(to_string(r.method));
    row["scale"] = r.scale;
    row["runs"] = r.runs;
    row["mean_ms"] = r.mean_ms;
    row["median_ms"] = r.median_ms;
    row["mean_ratio"] = opt(r.mean_ratio);
    row["median_ratio"] = opt(r.median_ratio);
    row["failures"] = r.failures;
    row["errors"] = r.errors;
    if (r.time_ratio) row["time_ratio"] = *r.time_ratio;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  ordered_json summaries = ordered_json::array();
  for (const BenchQuerySummary& s : report.summaries) {
    summaries.push_back({{"query", s.query},
                         {"mean_ratio", opt(s.mean_ratio)},
                         {"median_ratio", opt(s.median_ratio)}});
  }
  doc["queries"] = std::move(summaries);
  return doc.dump(2);
}

void write_csv(const BenchReport& report, std::ostream& out) {
  const auto num = [](double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
  };
  const auto opt = [&](const std::optional<double>& v) {
    return v ? num(*v) : std::string();
  };
  out << "query,method,scale,mean_ms,median_ms,mean_ratio,median_ratio,failures\n";
  for (const BenchRow& r : report.rows) {
    std::string name = r.query;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      name = quoted + "\"";
    }
    out << name << ',' << to_string(r.method) << ',' << num(r.scale) << ','
        << num(r.mean_ms) << ',' << num(r.median_ms) << ',' << opt(r.mean_ratio)
        << ',' << opt(r.median_ratio) << ',' << r.failures << '\n';
  }
}

}  // namespace paql
