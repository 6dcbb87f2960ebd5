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

#ifndef KWS_QUERY_H_
#define KWS_QUERY_H_

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "kws/index.h"

namespace kws {

struct Hit {
  std::size_t rank = 0;  // 1-based
  std::string region_id;
  double score = 0.0;
  FrameSpan span;
};

struct QueryResult {
  std::string query;
  double tau = 0.0;
  bool out_of_lexicon = false;
  std::vector<Hit> hits;
  // Regions with score > tau before truncation to the limit.
  std::size_t detected_count = 0;
};

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

// Spots of `query` with score strictly above `tau`, best first, at most
// `limit` of them. Words are matched exactly.
QueryResult Search(const SpotIndex& index, std::string_view query, double tau,
                   std::size_t limit = kNoLimit);

// Indexed words starting with `prefix`, in lexicographic order.
std::vector<std::string> Suggest(const SpotIndex& index,
                                 std::string_view prefix, std::size_t limit);

}  // namespace kws

#endif  // KWS_QUERY_H_
