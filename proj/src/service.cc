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

#include "kws/service.h"

#include <charconv>
#include <cmath>
#include <mutex>
#include <optional>

#include "httplib.h"
#include "json.hpp"

namespace kws {
namespace {

using Json = nlohmann::ordered_json;

constexpr char kJson[] = "application/json";
constexpr std::size_t kDefaultSearchLimit = 100;
constexpr std::size_t kDefaultSuggestLimit = 10;

ServiceResponse JsonError(int status, const std::string& message) {
  Json j;
  j["error"] = message;
  return {status, kJson, j.dump()};
}

std::optional<double> ParseReal(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::size_t> ParseCount(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

const std::string* Param(const httplib::Params& params, const char* key) {
  auto it = params.find(key);
  return it == params.end() ? nullptr : &it->second;
}

}  // namespace

std::string SearchResponseJson(const QueryResult& result) {
  Json j;
  j["query"] = result.query;
  j["tau"] = result.tau;
  j["out_of_lexicon"] = result.out_of_lexicon;
  j["detected_count"] = result.detected_count;
  Json hits = Json::array();
  for (const Hit& h : result.hits) {
    Json row;
    row["rank"] = h.rank;
    row["region_id"] = h.region_id;
    row["score"] = h.score;
    row["span"] = {{"begin", h.span.begin}, {"end", h.span.end}};
    hits.push_back(std::move(row));
  }
  j["results"] = std::move(hits);
  return j.dump();
}

struct SearchService::Impl {
  mutable std::mutex mu;
  std::shared_ptr<const SpotIndex> index;
  httplib::Server server;

  std::shared_ptr<const SpotIndex> Current() const {
    std::lock_guard lock(mu);
    return index;
  }

  ServiceResponse Route(const std::string& path,
                        const httplib::Params& params) const {
    if (path == "/healthz") return {200, "text/plain", "ok"};
    if (path != "/api/search" && path != "/api/suggest" && path != "/api/stats") {
      return JsonError(404, "no such endpoint: " + path);
    }
    const auto ix = Current();
    if (!ix) return JsonError(503, "index not loaded yet");

    if (path == "/api/stats") return {200, kJson, StatsJson(Stats(*ix))};

    if (path == "/api/suggest") {
      const std::string* prefix = Param(params, "prefix");
      std::size_t limit = kDefaultSuggestLimit;
      if (const std::string* l = Param(params, "limit")) {
        auto v = ParseCount(*l);
        if (!v) return JsonError(400, "limit must be a non-negative integer");
        limit = *v;
      }
      Json words = Suggest(*ix, prefix ? *prefix : std::string(), limit);
      return {200, kJson, words.dump()};
    }

    const std::string* q = Param(params, "q");
    if (q == nullptr || q->empty()) return JsonError(400, "missing q");
    double tau = 0.5;
    if (const std::string* t = Param(params, "tau")) {
      auto v = ParseReal(*t);
      if (!v) return JsonError(400, "tau must be a real number");
      tau = *v;
    }
    const bool unbounded = ix->method() == RelevanceMethod::kBlockSum;
    if (tau < 0.0 || (!unbounded && tau > 1.0)) {
      return JsonError(400, unbounded ? "tau must be >= 0"
                                      : "tau must lie in [0, 1]");
    }
    std::size_t limit = kDefaultSearchLimit;
    if (const std::string* l = Param(params, "limit")) {
      auto v = ParseCount(*l);
      if (!v) return JsonError(400, "limit must be a non-negative integer");
      limit = *v;
    }
    return {200, kJson, SearchResponseJson(Search(*ix, *q, tau, limit))};
  }
};

SearchService::SearchService() : impl_(std::make_unique<Impl>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceResponse r = impl_->Route(req.path, req.params);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  for (const char* path :
       {"/healthz", "/api/search", "/api/suggest", "/api/stats"}) {
    impl_->server.Get(path, handler);
  }
  impl_->server.Options(".*", [](const httplib::Request&,
                                  httplib::Response& res) { res.status = 204; });
  impl_->server.set_post_routing_handler(
      [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
      });
}

SearchService::~SearchService() { Stop(); }

void SearchService::SetIndex(std::shared_ptr<const SpotIndex> index) {
  std::lock_guard lock(impl_->mu);
  impl_->index = std::move(index);
}

ServiceResponse SearchService::Handle(const std::string& target) const {
  const auto qpos = target.find('?');
  const std::string path = target.substr(0, qpos);
  httplib::Params params;
  if (qpos != std::string::npos) {
    httplib::detail::parse_query_text(target.substr(qpos + 1), params);
  }
  return impl_->Route(path, params);
}

int SearchService::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool SearchService::Listen() { return impl_->server.listen_after_bind(); }

void SearchService::WaitUntilReady() const {
  impl_->server.wait_until_ready();
}

void SearchService::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace kws
