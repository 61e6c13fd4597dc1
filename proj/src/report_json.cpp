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

#include <string>

#include "json.hpp"
#include "paql/evaluator.hpp"

namespace paql {

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["method"] = std::string(to_string(report.method));
  j["status"] = std::string(to_string(report.status));
  nlohmann::ordered_json package = nlohmann::ordered_json::array();
  if (report.package) {
    j["objective"] = report.package->objective_value;
    for (const auto& [id, mult] : report.package->entries) {
      package.push_back({id, mult});
    }
  } else {
    j["objective"] = nullptr;
  }
  j["package"] = std::move(package);
  j["timings_ms"] = {{"translate", report.timings.translate_ms},
                     {"solve", report.timings.solve_ms},
                     {"sketch", report.timings.sketch_ms},
                     {"refine", report.timings.refine_ms},
                     {"total", report.timings.total_ms}};
  j["backtracks"] = report.backtracks;
  j["subproblems"] = report.subproblems;
  j["flags"] = report.flags;
  return j.dump(2);
}

}  // namespace paql
