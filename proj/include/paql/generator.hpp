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

// Seeded synthetic data and query workloads.

#ifndef PAQL_GENERATOR_HPP_
#define PAQL_GENERATOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paql/ilp.hpp"
#include "paql/query.hpp"
#include "paql/relation.hpp"

namespace paql {

enum class Distribution { kUniform, kNormal };

struct DataParams {
  std::string name = "synthetic";
  std::size_t rows = 1000;
  std::size_t cols = 4;
  Distribution distribution = Distribution::kUniform;
  // Uniform: [lo, hi). Normal: mean lo, standard deviation hi.
  double lo = 0.0;
  double hi = 1.0;
  // Normal draws are clamped below at this value when set (for example 0 to
  // keep data non-negative).
  std::optional<double> clamp_min;
  std::uint64_t seed = 0;
};

// Numeric columns attr_1 .. attr_cols. Throws ValidationError for zero rows
// or columns, hi <= lo (uniform), non-positive deviation (normal) or
// non-finite parameters.
Relation generate_relation(const DataParams& params);

struct WorkloadParams {
  std::size_t queries = 5;
  // Expected package size is drawn uniformly from this range.
  std::size_t min_expected_size = 5;
  std::size_t max_expected_size = 15;
  // SUM constraints per query, on distinct attributes.
  std::size_t min_constraints = 1;
  std::size_t max_constraints = 2;
  std::int64_t repeat = 0;
  std::uint64_t seed = 0;
};

// Random queries over the numeric attributes of `relation`: COUNT(P.*) >= 1,
// SUM constraints whose bound is a uniform value from the attribute's range
// times the expected package size, and a SUM objective over an attribute
// the constraints do not use (when one is left). Maximization queries get at
// least one <= constraint, minimization queries at least one >=.
std::vector<PackageQuery> generate_workload(const Relation& relation,
                                            const WorkloadParams& params);

struct RawIlpParams {
  std::size_t n = 6;
  std::size_t k = 3;
  std::int64_t min_coefficient = -5;
  std::int64_t max_coefficient = 5;
  // Makes constraint 0 have strictly positive coefficients and a
  // non-negative bound, so every variable is bounded.
  bool bounded = true;
  std::uint64_t seed = 0;
};

RawIlp generate_raw_ilp(const RawIlpParams& params);

}  // namespace paql

#endif  // PAQL_GENERATOR_HPP_
