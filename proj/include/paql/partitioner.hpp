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

// Offline quad-tree partitioning.
//
// A group is split while it has more than tau tuples or its radius (largest
// absolute deviation of any member from the centroid, over all partitioning
// attributes) exceeds omega. A split sends each member to one of up to 2^k
// children by comparing every attribute with the group centroid: strictly
// below goes low, everything else high.

#ifndef PAQL_PARTITIONER_HPP_
#define PAQL_PARTITIONER_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paql/query.hpp"
#include "paql/relation.hpp"

namespace paql {

inline constexpr double kNoRadiusLimit =
    std::numeric_limits<double>::infinity();

struct PartitionParams {
  std::vector<std::string> attrs;
  std::size_t tau = 1;
  double omega = kNoRadiusLimit;
};

struct Partitioning {
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::vector<std::string> attrs;
  std::size_t tau = 1;
  double omega = kNoRadiusLimit;
  // Per tuple id: 0-based group index, or kUnassigned for tuples that are
  // not covered (removed by shrinking or filtering).
  std::vector<std::size_t> gid;
  std::vector<std::vector<TupleId>> members;        // ascending ids
  std::vector<std::vector<double>> representatives;  // m x k centroids
  std::vector<double> radii;
  // Sorted indices of groups that exceed tau only because their members
  // coincide on every partitioning attribute.
  std::vector<std::size_t> degenerate;

  std::size_t num_groups() const { return members.size(); }
  std::size_t size(std::size_t group) const { return members[group].size(); }
  bool is_degenerate(std::size_t group) const;
  // Number of tuples that belong to some group.
  std::size_t covered() const;
};

// Throws ValidationError for tau < 1, negative or NaN omega, empty or
// unknown attributes and categorical attributes.
Partitioning partition(const Relation& relation, const PartitionParams& params);

// The radius limit that makes every member of every group agree with its
// representative within a factor (1 +- epsilon) on each attribute:
// min over groups and attributes of gamma * |rep|, gamma = epsilon when
// maximizing (requires 0 <= epsilon < 1) and epsilon / (1 + epsilon) when
// minimizing (requires epsilon >= 0).
double radius_limit_from_epsilon(
    const std::vector<std::vector<double>>& representatives, double epsilon,
    Direction direction);

// Partitions with the radius limit derived from epsilon. Because the limit
// depends on the representatives, the limit is lowered and the relation
// re-partitioned until every group meets the limit computed from the final
// representatives. The returned omega is that limit.
Partitioning partition_for_epsilon(const Relation& relation,
                                   std::vector<std::string> attrs,
                                   std::size_t tau, double epsilon,
                                   Direction direction);

// Keeps only the listed tuples (others become unassigned), recomputes
// centroids and radii, and drops groups left empty.
Partitioning restrict_partitioning(const Partitioning& partitioning,
                                   const Relation& relation,
                                   std::span<const TupleId> keep);

// Uniformly removes tuples, keeping round(keep_fraction * covered) of them.
// Group memberships of survivors are preserved. Throws ValidationError for
// keep_fraction outside (0, 1].
Partitioning shrink_for_scaling(const Partitioning& partitioning,
                                const Relation& relation, double keep_fraction,
                                std::uint64_t seed);

// Problems found when recomputing sizes, radii and centroids from the data;
// empty when the partitioning satisfies its contract.
std::vector<std::string> check_partitioning(const Partitioning& partitioning,
                                            const Relation& relation);

// JSON with attrs, tau, omega ("inf" when unlimited), gids (1-based, 0 for
// unassigned), representatives, radii, sizes and degenerate (1-based).
std::string to_json(const Partitioning& partitioning);
Partitioning parse_partitioning(std::string_view json_text);
void save_partitioning(const Partitioning& partitioning,
                       const std::string& path);
Partitioning load_partitioning(const std::string& path);

}  // namespace paql

#endif  // PAQL_PARTITIONER_HPP_
