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

#include "kws/eval.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "kws/errors.h"

namespace kws {
namespace {

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Qrels ReadQrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  Qrels qrels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(std::move(line));
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected 'word<TAB>region_id'");
    }
    qrels[line.substr(0, tab)].insert(line.substr(tab + 1));
  }
  return qrels;
}

std::vector<std::string> ReadQueries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> queries;
  std::string line;
  while (std::getline(in, line)) {
    line = StripCr(std::move(line));
    if (!line.empty()) queries.push_back(std::move(line));
  }
  return queries;
}

RpCurve ComputeRpCurve(std::vector<Judgement> pool,
                       std::size_t total_relevant) {
  if (total_relevant == 0) {
    throw EvalError("AP undefined: no relevant region for any query");
  }
  std::sort(pool.begin(), pool.end(),
            [](const Judgement& a, const Judgement& b) {
              return a.score > b.score;
            });
  RpCurve curve;
  const double r = static_cast<double>(total_relevant);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pool.size();) {
    std::size_t j = i;
    for (; j < pool.size() && pool[j].score == pool[i].score; ++j) {
      hits += pool[j].relevant ? 1 : 0;
    }
    const double recall = static_cast<double>(hits) / r;
    const double precision =
        static_cast<double>(hits) / static_cast<double>(j);
    curve.points.push_back({recall, precision, 0.0});
    i = j;
  }

  // Interpolated precision per recall level, from the right.
  double best = 0.0;
  for (std::size_t hi = curve.points.size(); hi > 0;) {
    std::size_t lo = hi - 1;
    while (lo > 0 && curve.points[lo - 1].recall == curve.points[hi - 1].recall)
      --lo;
    for (std::size_t k = lo; k < hi; ++k) {
      best = std::max(best, curve.points[k].precision_raw);
    }
    for (std::size_t k = lo; k < hi; ++k) {
      curve.points[k].precision_interpolated = best;
    }
    hi = lo;
  }

  double prev_recall = 0.0;
  for (const RpPoint& p : curve.points) {
    if (p.recall > prev_recall) {
      const double width = p.recall - prev_recall;
      curve.ap_raw += width * p.precision_raw;
      curve.ap_interpolated += width * p.precision_interpolated;
      prev_recall = p.recall;
    }
  }
  return curve;
}

namespace {

std::vector<std::string> Dedupe(std::span<const std::string> queries) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& q : queries) {
    if (seen.insert(q).second) out.push_back(q);
  }
  return out;
}

std::size_t RelevantCount(const Qrels& qrels, const std::string& q) {
  auto it = qrels.find(q);
  return it == qrels.end() ? 0 : it->second.size();
}

bool IsRelevant(const Qrels& qrels, const std::string& q,
                const std::string& region) {
  auto it = qrels.find(q);
  return it != qrels.end() && it->second.contains(region);
}

void FinishMap(EvalReport& report) {
  report.query_count = report.per_query.size();
  double sum = 0.0;
  bool defined = !report.per_query.empty();
  for (const auto& [q, e] : report.per_query) {
    if (e.relevant > 0) {
      ++report.relevant_query_count;
      sum += *e.ap_interpolated;
    } else {
      defined = false;
    }
  }
  if (defined) report.map_value = sum / static_cast<double>(report.query_count);
}

}  // namespace

EvalReport Evaluate(const SpotIndex& index,
                    std::span<const std::string> queries, const Qrels& qrels) {
  if (queries.empty()) throw EvalError("no queries to evaluate");
  EvalReport report;
  std::vector<Judgement> pool;
  std::size_t total_relevant = 0;
  for (const std::string& q : Dedupe(queries)) {
    QueryEval e;
    e.relevant = RelevantCount(qrels, q);
    std::vector<Judgement> own;
    for (const Posting& p : index.Find(q)) {
      const bool rel = IsRelevant(qrels, q, index.RegionId(p.region));
      own.push_back({p.score, rel});
      e.hits += rel ? 1 : 0;
    }
    e.detected = own.size();
    if (e.relevant > 0) {
      const RpCurve c = ComputeRpCurve(own, e.relevant);
      e.ap_interpolated = c.ap_interpolated;
      e.ap_raw = c.ap_raw;
    }
    total_relevant += e.relevant;
    pool.insert(pool.end(), own.begin(), own.end());
    report.per_query.emplace(q, e);
  }
  report.global = ComputeRpCurve(std::move(pool), total_relevant);
  FinishMap(report);
  return report;
}

EvalReport EvaluateOneBest(const SpotIndex& index,
                           std::span<const std::string> queries,
                           const Qrels& qrels) {
  if (index.method() != RelevanceMethod::kOneBest) {
    throw EvalError("1-best evaluation needs an index built with 'onebest'");
  }
  if (queries.empty()) throw EvalError("no queries to evaluate");

  auto operating_point = [](std::size_t h, std::size_t d, std::size_t r) {
    RpCurve c;
    const double recall = static_cast<double>(h) / static_cast<double>(r);
    const double precision =
        d == 0 ? 0.0 : static_cast<double>(h) / static_cast<double>(d);
    if (d > 0) c.points.push_back({recall, precision, precision});
    c.ap_interpolated = precision * recall;
    c.ap_raw = 0.0;
    return c;
  };

  EvalReport report;
  std::size_t h = 0, d = 0, r = 0;
  for (const std::string& q : Dedupe(queries)) {
    QueryEval e;
    e.relevant = RelevantCount(qrels, q);
    for (const Posting& p : index.Find(q)) {
      ++e.detected;
      e.hits += IsRelevant(qrels, q, index.RegionId(p.region)) ? 1 : 0;
    }
    if (e.relevant > 0) {
      const RpCurve c = operating_point(e.hits, e.detected, e.relevant);
      e.ap_interpolated = c.ap_interpolated;
      e.ap_raw = c.ap_raw;
    }
    h += e.hits;
    d += e.detected;
    r += e.relevant;
    report.per_query.emplace(q, e);
  }
  if (r == 0) throw EvalError("AP undefined: no relevant region for any query");
  report.global = operating_point(h, d, r);
  FinishMap(report);
  return report;
}

void WriteRpCsv(const RpCurve& curve, std::ostream& out) {
  out << "recall,precision_raw,precision_interpolated\n";
  char buf[96];
  for (const RpPoint& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", p.recall,
                  p.precision_raw, p.precision_interpolated);
    out << buf;
  }
}

void WriteRpCsv(const RpCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  WriteRpCsv(curve, out);
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

std::string EvalReportJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["ap"] = report.global.ap_interpolated;
  j["ap_raw"] = report.global.ap_raw;
  j["map"] = report.map_value ? nlohmann::ordered_json(*report.map_value)
                              : nlohmann::ordered_json(nullptr);
  j["query_count"] = report.query_count;
  j["relevant_query_count"] = report.relevant_query_count;
  j["curve_points"] = report.global.points.size();
  auto& per = j["per_query"] = nlohmann::ordered_json::object();
  for (const auto& [q, e] : report.per_query) {
    nlohmann::ordered_json row;
    row["relevant"] = e.relevant;
    row["detected"] = e.detected;
    row["hits"] = e.hits;
    row["ap"] = e.ap_interpolated ? nlohmann::ordered_json(*e.ap_interpolated)
                                  : nlohmann::ordered_json(nullptr);
    row["ap_raw"] = e.ap_raw ? nlohmann::ordered_json(*e.ap_raw)
                             : nlohmann::ordered_json(nullptr);
    per[q] = std::move(row);
  }
  return j.dump();
}

}  // namespace kws
