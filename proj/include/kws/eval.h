// Copyright 2026 The KWS Authors
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

// Retrieval evaluation: recall / precision curves, interpolated precision,
// global AP over pooled queries, per-query AP and mAP.
//
// Curves are traced by sweeping the threshold over the distinct scores, so
// all spots sharing a score enter the detected set together and the result
// does not depend on the order of tied items. AP is the step integral
//
//   AP = sum over recall levels l of (recall_l - recall_{l-1}) * P(recall_l)
//
// with P the interpolated precision (max precision at any recall >= the
// level) or, for the raw variant, the precision of the first operating point
// reaching the level.

#ifndef KWS_EVAL_H_
#define KWS_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kws/index.h"

namespace kws {

// word -> relevant region ids. Words mapped to an empty set, and words not
// present at all, have r(q) = 0.
using Qrels = std::map<std::string, std::set<std::string>, std::less<>>;

// TSV lines `word<TAB>region_id`; blank lines ignored.
Qrels ReadQrels(const std::filesystem::path& path);
// One word per line; blank lines ignored.
std::vector<std::string> ReadQueries(const std::filesystem::path& path);

struct RpPoint {
  double recall = 0.0;
  double precision_raw = 0.0;
  double precision_interpolated = 0.0;
};

struct RpCurve {
  std::vector<RpPoint> points;  // recall nondecreasing
  double ap_raw = 0.0;
  double ap_interpolated = 0.0;
};

struct Judgement {
  double score = 0.0;
  bool relevant = false;
};

// Curve of a ranked pool against `total_relevant` ground-truth items.
// Throws EvalError if total_relevant is 0.
RpCurve ComputeRpCurve(std::vector<Judgement> pool, std::size_t total_relevant);

struct QueryEval {
  std::size_t relevant = 0;  // r(q)
  std::size_t detected = 0;  // spots in the index for q
  std::size_t hits = 0;      // relevant among them
  // Absent when r(q) = 0.
  std::optional<double> ap_interpolated;
  std::optional<double> ap_raw;
};

struct EvalReport {
  std::map<std::string, QueryEval> per_query;
  RpCurve global;
  // Mean of per-query interpolated APs; only when every query has r(q) > 0.
  std::optional<double> map_value;
  std::size_t query_count = 0;
  std::size_t relevant_query_count = 0;
};

// Duplicate queries are evaluated once. Throws EvalError if no query has
// any relevant region.
EvalReport Evaluate(const SpotIndex& index, std::span<const std::string> queries,
                    const Qrels& qrels);

// Single operating point (recall0, precision0) of a 1-best index. The
// interpolated AP is precision0 * recall0; the raw AP of a one-point curve
// is 0. Throws EvalError for an index built with another estimator.
EvalReport EvaluateOneBest(const SpotIndex& index,
                           std::span<const std::string> queries,
                           const Qrels& qrels);

// `recall,precision_raw,precision_interpolated`, 6 decimals.
void WriteRpCsv(const RpCurve& curve, std::ostream& out);
void WriteRpCsv(const RpCurve& curve, const std::filesystem::path& path);

std::string EvalReportJson(const EvalReport& report);

}  // namespace kws

#endif  // KWS_EVAL_H_
