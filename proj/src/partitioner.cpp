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

#include "paql/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "paql/error.hpp"

namespace paql {

bool Partitioning::is_degenerate(std::size_t group) const {
  return std::binary_search(degenerate.begin(), degenerate.end(), group);
}

std::size_t Partitioning::covered() const {
  std::size_t total = 0;
  for (const auto& g : members) total += g.size();
  return total;
}

namespace {

std::vector<std::size_t> resolve_attrs(const Schema& schema,
                                       const std::vector<std::string>& attrs) {
  if (attrs.empty()) {
    throw ValidationError("partitioning needs at least one attribute");
  }
  std::vector<std::size_t> out;
  for (const std::string& name : attrs) {
    const std::size_t index = schema.require(name);
    if (schema.attribute(index).kind != AttributeKind::kNumeric) {
      throw ValidationError("partitioning attribute '" + name +
                            "' is categorical");
    }
    if (std::find(out.begin(), out.end(), index) != out.end()) {
      throw ValidationError("partitioning attribute '" + name +
                            "' listed twice");
    }
    out.push_back(index);
  }
  return out;
}

std::vector<double> centroid(const Relation& relation,
                             const std::vector<std::size_t>& attrs,
                             const std::vector<TupleId>& ids) {
  std::vector<double> out(attrs.size(), 0.0);
  if (ids.empty()) return out;
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    long double sum = 0.0L;
    for (TupleId id : ids) sum += relation.numeric(attrs[a], id);
    out[a] = static_cast<double>(sum / static_cast<long double>(ids.size()));
  }
  return out;
}

double radius(const Relation& relation, const std::vector<std::size_t>& attrs,
              const std::vector<TupleId>& ids, const std::vector<double>& rep) {
  double r = 0.0;
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    for (TupleId id : ids) {
      r = std::max(r, std::abs(relation.numeric(attrs[a], id) - rep[a]));
    }
  }
  return r;
}

// Recomputes representatives and radii from members, drops empty groups and
// rebuilds gid.
void finalize(Partitioning& p, const Relation& relation,
              const std::vector<std::size_t>& attrs,
              const std::vector<char>& degenerate_flags) {
  std::vector<std::vector<TupleId>> groups;
  std::vector<std::size_t> degenerate;
  for (std::size_t j = 0; j < p.members.size(); ++j) {
    if (p.members[j].empty()) continue;
    if (j < degenerate_flags.size() && degenerate_flags[j]) {
      degenerate.push_back(groups.size());
    }
    groups.push_back(std::move(p.members[j]));
  }
  p.members = std::move(groups);
  p.degenerate = std::move(degenerate);
  p.representatives.clear();
  p.radii.clear();
  p.gid.assign(relation.size(), Partitioning::kUnassigned);
  for (std::size_t j = 0; j < p.members.size(); ++j) {
    std::sort(p.members[j].begin(), p.members[j].end());
    p.representatives.push_back(centroid(relation, attrs, p.members[j]));
    p.radii.push_back(
        radius(relation, attrs, p.members[j], p.representatives.back()));
    for (TupleId id : p.members[j]) p.gid[id] = j;
  }
}

}  // namespace

Partitioning partition(const Relation& relation, const PartitionParams& params) {
  const std::vector<std::size_t> attrs =
      resolve_attrs(relation.schema(), params.attrs);
  if (params.tau < 1) throw ValidationError("tau must be at least 1");
  if (std::isnan(params.omega) || params.omega < 0.0) {
    throw ValidationError("omega must be non-negative");
  }
  const std::size_t k = attrs.size();
  if (k >= 31) throw ValidationError("too many partitioning attributes");

  Partitioning p;
  p.attrs = params.attrs;
  p.tau = params.tau;
  p.omega = params.omega;
  std::vector<char> degenerate_flags;

  std::vector<std::vector<TupleId>> stack;
  if (!relation.empty()) {
    std::vector<TupleId> all(relation.size());
    for (TupleId i = 0; i < all.size(); ++i) all[i] = i;
    stack.push_back(std::move(all));
  }
  const std::size_t buckets = std::size_t{1} << k;
  while (!stack.empty()) {
    std::vector<TupleId> group = std::move(stack.back());
    stack.pop_back();
    const std::vector<double> rep = centroid(relation, attrs, group);
    const bool small = group.size() <= params.tau;
    if (small && radius(relation, attrs, group, rep) <= params.omega) {
      p.members.push_back(std::move(group));
      degenerate_flags.push_back(0);
      continue;
    }
    std::vector<std::vector<TupleId>> parts(buckets);
    for (TupleId id : group) {
      std::size_t b = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if (relation.numeric(attrs[a], id) >= rep[a]) b |= std::size_t{1} << a;
      }
      parts[b].push_back(id);
    }
    const auto nonempty = std::count_if(
        parts.begin(), parts.end(), [](const auto& v) { return !v.empty(); });
    if (nonempty <= 1) {
      // Every member sits on the same side of the centroid everywhere, so
      // the members coincide and no split can separate them.
      p.members.push_back(std::move(group));
      degenerate_flags.push_back(1);
      continue;
    }
    for (std::size_t b = buckets; b-- > 0;) {
      if (!parts[b].empty()) stack.push_back(std::move(parts[b]));
    }
  }
  finalize(p, relation, attrs, degenerate_flags);
  return p;
}

double radius_limit_from_epsilon(
    const std::vector<std::vector<double>>& representatives, double epsilon,
    Direction direction) {
  double gamma = 0.0;
  if (direction == Direction::kMaximize) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
      throw ValidationError("epsilon must be in [0, 1) for maximization");
    }
    gamma = epsilon;
  } else {
    if (!(epsilon >= 0.0) || std::isinf(epsilon)) {
      throw ValidationError("epsilon must be non-negative for minimization");
    }
    gamma = epsilon / (1.0 + epsilon);
  }
  double omega = kNoRadiusLimit;
  for (const auto& rep : representatives) {
    for (double v : rep) omega = std::min(omega, gamma * std::abs(v));
  }
  return omega;
}

Partitioning partition_for_epsilon(const Relation& relation,
                                   std::vector<std::string> attrs,
                                   std::size_t tau, double epsilon,
                                   Direction direction) {
  // Validates epsilon before doing any work.
  radius_limit_from_epsilon({}, epsilon, direction);
  PartitionParams params{std::move(attrs), tau, kNoRadiusLimit};
  Partitioning p = partition(relation, params);
  // Lowering omega only ever splits groups further, so this terminates;
  // the pass cap guards against pathological data.
  for (int pass = 0; pass < 64; ++pass) {
    const double limit =
        radius_limit_from_epsilon(p.representatives, epsilon, direction);
    bool ok = true;
    for (std::size_t j = 0; j < p.num_groups() && ok; ++j) {
      ok = p.is_degenerate(j) || p.radii[j] <= limit;
    }
    if (ok) {
      p.omega = limit;
      return p;
    }
    params.omega = std::min(params.omega, limit);
    p = partition(relation, params);
  }
  params.omega = 0.0;
  p = partition(relation, params);
  p.omega = radius_limit_from_epsilon(p.representatives, epsilon, direction);
  return p;
}

Partitioning restrict_partitioning(const Partitioning& partitioning,
                                   const Relation& relation,
                                   std::span<const TupleId> keep) {
  const std::vector<std::size_t> attrs =
      resolve_attrs(relation.schema(), partitioning.attrs);
  if (partitioning.gid.size() != relation.size()) {
    throw ValidationError("partitioning does not match relation size");
  }
  Partitioning out;
  out.attrs = partitioning.attrs;
  out.tau = partitioning.tau;
  out.omega = partitioning.omega;
  out.members.resize(partitioning.num_groups());
  for (TupleId id : keep) {
    if (id >= relation.size()) {
      throw std::out_of_range("tuple id out of range");
    }
    const std::size_t g = partitioning.gid[id];
    if (g != Partitioning::kUnassigned) out.members[g].push_back(id);
  }
  std::vector<char> flags(partitioning.num_groups(), 0);
  for (std::size_t j : partitioning.degenerate) flags[j] = 1;
  finalize(out, relation, attrs, flags);
  // A shrunken degenerate group may now meet both conditions.
  std::erase_if(out.degenerate, [&out](std::size_t j) {
    return out.size(j) <= out.tau && out.radii[j] <= out.omega;
  });
  return out;
}

Partitioning shrink_for_scaling(const Partitioning& partitioning,
                                const Relation& relation, double keep_fraction,
                                std::uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ValidationError("keep_fraction must be in (0, 1]");
  }
  std::vector<TupleId> ids;
  for (const auto& group : partitioning.members) {
    ids.insert(ids.end(), group.begin(), group.end());
  }
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto keep = static_cast<std::size_t>(
      std::llround(keep_fraction * static_cast<double>(ids.size())));
  ids.resize(std::min(keep, ids.size()));
  std::sort(ids.begin(), ids.end());
  return restrict_partitioning(partitioning, relation, ids);
}

std::vector<std::string> check_partitioning(const Partitioning& p,
                                            const Relation& relation) {
  std::vector<std::string> problems;
  const std::vector<std::size_t> attrs =
      resolve_attrs(relation.schema(), p.attrs);
  if (p.gid.size() != relation.size()) {
    problems.push_back("gid length differs from relation size");
    return problems;
  }
  std::vector<std::size_t> seen(relation.size(), 0);
  for (std::size_t j = 0; j < p.num_groups(); ++j) {
    const auto& ids = p.members[j];
    const std::string tag = "group " + std::to_string(j) + ": ";
    if (ids.empty()) problems.push_back(tag + "empty");
    for (TupleId id : ids) {
      if (id >= relation.size()) {
        problems.push_back(tag + "member out of range");
        continue;
      }
      ++seen[id];
      if (p.gid[id] != j) problems.push_back(tag + "gid mismatch");
    }
    const bool degenerate = p.is_degenerate(j);
    if (!degenerate && ids.size() > p.tau) {
      problems.push_back(tag + "size exceeds tau");
    }
    const std::vector<double> mean = centroid(relation, attrs, ids);
    if (p.representatives.size() <= j || p.representatives[j].size() != attrs.size()) {
      problems.push_back(tag + "missing representative");
      continue;
    }
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      const double rep = p.representatives[j][a];
      if (std::abs(rep - mean[a]) > 1e-9 * std::max(1.0, std::abs(mean[a]))) {
        problems.push_back(tag + "representative is not the centroid");
      }
    }
    const double r = radius(relation, attrs, ids, mean);
    if (!degenerate && r > p.omega) {
      problems.push_back(tag + "radius exceeds omega");
    }
  }
  for (TupleId id = 0; id < relation.size(); ++id) {
    if (seen[id] > 1) problems.push_back("tuple in several groups");
    if (seen[id] == 0 && p.gid[id] != Partitioning::kUnassigned) {
      problems.push_back("gid names a group that does not list the tuple");
    }
  }
  return problems;
}

std::string to_json(const Partitioning& p) {
  nlohmann::json doc;
  doc["attrs"] = p.attrs;
  doc["tau"] = p.tau;
  if (std::isinf(p.omega)) {
    doc["omega"] = "inf";
  } else {
    doc["omega"] = p.omega;
  }
  std::vector<std::size_t> gids(p.gid.size());
  for (std::size_t i = 0; i < p.gid.size(); ++i) {
    gids[i] = p.gid[i] == Partitioning::kUnassigned ? 0 : p.gid[i] + 1;
  }
  doc["gids"] = gids;
  doc["representatives"] = p.representatives;
  doc["radii"] = p.radii;
  std::vector<std::size_t> sizes;
  for (const auto& g : p.members) sizes.push_back(g.size());
  doc["sizes"] = sizes;
  std::vector<std::size_t> degenerate;
  for (std::size_t j : p.degenerate) degenerate.push_back(j + 1);
  doc["degenerate"] = degenerate;
  return doc.dump();
}

Partitioning parse_partitioning(std::string_view json_text) {
  Partitioning p;
  try {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    p.attrs = doc.at("attrs").get<std::vector<std::string>>();
    p.tau = doc.at("tau").get<std::size_t>();
    const auto& omega = doc.at("omega");
    if (omega.is_null() || (omega.is_string() && omega.get<std::string>() == "inf")) {
      p.omega = kNoRadiusLimit;
    } else {
      p.omega = omega.get<double>();
    }
    const auto gids = doc.at("gids").get<std::vector<std::size_t>>();
    p.representatives =
        doc.at("representatives").get<std::vector<std::vector<double>>>();
    p.radii = doc.at("radii").get<std::vector<double>>();
    const auto sizes = doc.at("sizes").get<std::vector<std::size_t>>();
    const std::size_t m = p.representatives.size();
    if (p.radii.size() != m || sizes.size() != m) {
      throw DataError("partitioning: representatives, radii and sizes differ "
                      "in length");
    }
    p.members.resize(m);
    p.gid.assign(gids.size(), Partitioning::kUnassigned);
    for (std::size_t i = 0; i < gids.size(); ++i) {
      if (gids[i] == 0) continue;
      if (gids[i] > m) throw DataError("partitioning: gid out of range");
      p.gid[i] = gids[i] - 1;
      p.members[gids[i] - 1].push_back(i);
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (p.members[j].size() != sizes[j]) {
        throw DataError("partitioning: sizes do not match gids");
      }
      if (p.representatives[j].size() != p.attrs.size()) {
        throw DataError("partitioning: representative width differs from "
                        "attrs");
      }
    }
    for (std::size_t j : doc.at("degenerate").get<std::vector<std::size_t>>()) {
      if (j == 0 || j > m) throw DataError("partitioning: bad degenerate index");
      p.degenerate.push_back(j - 1);
    }
    std::sort(p.degenerate.begin(), p.degenerate.end());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("partitioning: ") + e.what());
  }
  return p;
}

void save_partitioning(const Partitioning& partitioning,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << to_json(partitioning) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

Partitioning load_partitioning(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_partitioning(text.str());
}

}  // namespace paql
