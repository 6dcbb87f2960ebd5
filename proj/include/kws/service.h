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

// Read-only HTTP/JSON query service over a SpotIndex.
//
//   GET /healthz                        200 "ok"
//   GET /api/search?q=&tau=0.5&limit=100
//   GET /api/suggest?prefix=&limit=10
//   GET /api/stats
//
// API endpoints answer 503 until an index has been installed and 400 on
// malformed parameters. All responses carry a permissive CORS header.

#ifndef KWS_SERVICE_H_
#define KWS_SERVICE_H_

#include <memory>
#include <string>

#include "kws/index.h"
#include "kws/query.h"

namespace kws {

inline constexpr int kDefaultServicePort = 7878;

std::string SearchResponseJson(const QueryResult& result);

struct ServiceResponse {
  int status = 200;
  std::string content_type;
  std::string body;
};

class SearchService {
 public:
  SearchService();
  ~SearchService();
  SearchService(const SearchService&) = delete;
  SearchService& operator=(const SearchService&) = delete;

  // Installs the index served from now on. Thread-safe.
  void SetIndex(std::shared_ptr<const SpotIndex> index);

  // Routes one GET request without any socket I/O. `target` is the path
  // with its query string, e.g. "/api/search?q=cloud&tau=0.5".
  ServiceResponse Handle(const std::string& target) const;

  // Socket front end. Bind returns the bound port (pass 0 for any free
  // port) or -1 on failure. Listen blocks until Stop().
  int Bind(const std::string& host, int port);
  bool Listen();
  // Blocks until Listen() is accepting connections.
  void WaitUntilReady() const;
  // No effect before the server is running.
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kws

#endif  // KWS_SERVICE_H_
