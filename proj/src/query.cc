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

#include "kws/query.h"

#include <algorithm>

namespace kws {

QueryResult Search(const SpotIndex& index, std::string_view query, double tau,
                   std::size_t limit) {
  QueryResult result;
  result.query = std::string(query);
  result.tau = tau;
  result.out_of_lexicon = !index.Contains(query);
  const auto postings = index.Find(query);
  // Lists are sorted by descending score: the detected set is a prefix.
  const auto end = std::partition_point(
      postings.begin(), postings.end(),
      [tau](const Posting& p) { return p.score > tau; });
  result.detected_count = static_cast<std::size_t>(end - postings.begin());
  const std::size_t shown = std::min(limit, result.detected_count);
  result.hits.reserve(shown);
  for (std::size_t i = 0; i < shown; ++i) {
    const Posting& p = postings[i];
    result.hits.push_back({i + 1, index.RegionId(p.region), p.score,
                           FrameSpan{static_cast<int>(p.span_begin),
                                     static_cast<int>(p.span_end)}});
  }
  return result;
}

std::vector<std::string> Suggest(const SpotIndex& index,
                                 std::string_view prefix, std::size_t limit) {
  std::vector<std::string> words;
  const auto& entries = index.entries();
  for (auto it = entries.lower_bound(prefix);
       it != entries.end() && words.size() < limit &&
       std::string_view(it->first).starts_with(prefix);
       ++it) {
    words.push_back(it->first);
  }
  return words;
}

}  // namespace kws
