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

#include "kws/cli.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "kws/errors.h"
#include "kws/eval.h"
#include "kws/index.h"
#include "kws/posteriorgram.h"
#include "kws/query.h"
#include "kws/service.h"
#include "kws/synth.h"

namespace kws {
namespace {

std::string Fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

const std::map<std::string, RelevanceMethod> kMethods = {
    {"onebest", RelevanceMethod::kOneBest},
    {"sum", RelevanceMethod::kBlockSum},
    {"max", RelevanceMethod::kFrameMax},
    {"nb", RelevanceMethod::kNaiveBayes},
    {"exact", RelevanceMethod::kExact},
};

struct IndexArgs {
  std::string input;
  std::string output;
  RelevanceMethod method = RelevanceMethod::kFrameMax;
  double gamma = 1.0;
  double peak_threshold = kDefaultPeakThreshold;
  double prune = kDefaultPruneEpsilon;
  int threads = 0;
};

struct SearchArgs {
  std::string index;
  std::string query;
  double tau = 0.5;
  std::size_t limit = kNoLimit;
};

struct EvalArgs {
  std::string index;
  std::string queries;
  std::string qrels;
  std::string curve;
};

struct ServeArgs {
  std::string index;
  std::string host = "0.0.0.0";
  int port = kDefaultServicePort;
};

struct PgramArgs {
  std::string lattice;
  std::string output;
  double gamma = 1.0;
};

int CmdIndex(const IndexArgs& a, bool json, std::ostream& out,
             std::ostream& err) {
  IndexOptions options;
  options.method = a.method;
  options.normalization.gamma = a.gamma;
  options.peak_threshold = a.peak_threshold;
  options.prune_epsilon = a.prune;
  options.threads = a.threads;
  BuildResult built = BuildIndex(a.input, options);
  for (const auto& e : built.errors) err << "warning: skipped " << e << '\n';
  SaveIndex(built.index, a.output);
  const IndexStats s = Stats(built.index);
  if (json) {
    out << StatsJson(s) << '\n';
  } else {
    out << "regions=" << s.regions << " vocabulary=" << s.vocabulary_size
        << " spots=" << s.total_spots
        << " spots_per_line=" << Fixed(s.spots_per_line)
        << " failed=" << built.errors.size() << '\n';
  }
  return kExitOk;
}

int CmdSearch(const SearchArgs& a, bool json, std::ostream& out,
              std::ostream& err) {
  const SpotIndex index = LoadIndex(a.index);
  const QueryResult r = Search(index, a.query, a.tau, a.limit);
  if (json) {
    out << SearchResponseJson(r) << '\n';
    return kExitOk;
  }
  if (r.out_of_lexicon) err << "'" << a.query << "' is not in the lexicon\n";
  for (const Hit& h : r.hits) {
    out << h.rank << '\t' << h.region_id << '\t' << Fixed(h.score) << '\t'
        << h.span.begin << '\t' << h.span.end << '\n';
  }
  return kExitOk;
}

int CmdEval(const EvalArgs& a, bool json, std::ostream& out) {
  const SpotIndex index = LoadIndex(a.index);
  const auto queries = ReadQueries(a.queries);
  const Qrels qrels = ReadQrels(a.qrels);
  const EvalReport report = index.method() == RelevanceMethod::kOneBest
                                ? EvaluateOneBest(index, queries, qrels)
                                : Evaluate(index, queries, qrels);
  if (!a.curve.empty()) WriteRpCsv(report.global, std::filesystem::path(a.curve));
  if (json) {
    out << EvalReportJson(report) << '\n';
  } else {
    out << "AP=" << Fixed(report.global.ap_interpolated)
        << " AP_raw=" << Fixed(report.global.ap_raw) << " mAP="
        << (report.map_value ? Fixed(*report.map_value) : "undefined")
        << " queries=" << report.query_count
        << " relevant_queries=" << report.relevant_query_count << '\n';
  }
  return kExitOk;
}

int CmdSynth(const SynthConfig& cfg, const std::string& dir, bool json,
             std::ostream& out) {
  const SynthCorpus corpus = GenerateCorpus(cfg);
  WriteCorpus(corpus, dir);
  std::size_t pairs = 0;
  for (const auto& [w, regions] : corpus.qrels) pairs += regions.size();
  if (json) {
    nlohmann::ordered_json j;
    j["lines"] = corpus.lines.size();
    j["vocabulary"] = corpus.vocabulary.size();
    j["qrels"] = pairs;
    out << j.dump() << '\n';
  } else {
    out << "lines=" << corpus.lines.size()
        << " vocabulary=" << corpus.vocabulary.size() << " qrels=" << pairs
        << '\n';
  }
  return kExitOk;
}

int CmdServe(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  SearchService service;
  const int port = service.Bind(a.host, a.port);
  if (port < 0) {
    err << "cannot bind " << a.host << ":" << a.port << '\n';
    return kExitData;
  }
  out << "listening on " << a.host << ":" << port << std::endl;
  // Requests get 503 until the loader installs the index.
  bool load_failed = false;
  std::jthread loader([&] {
    try {
      service.SetIndex(std::make_shared<const SpotIndex>(LoadIndex(a.index)));
      out << "index loaded" << std::endl;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << std::endl;
      load_failed = true;
      service.WaitUntilReady();
      service.Stop();
    }
  });
  service.Listen();
  loader.join();
  return load_failed ? kExitData : kExitOk;
}

int CmdPgram(const PgramArgs& a, std::ostream& out) {
  const WordGraph g = Normalize(ReadLatticeFile(a.lattice), {a.gamma});
  const Posteriorgram pg = BuildPosteriorgram(g);
  if (a.output.empty()) {
    WritePosteriorgramCsv(pg, out);
    return kExitOk;
  }
  std::ofstream f(a.output, std::ios::trunc);
  if (!f) throw Error("cannot write " + a.output);
  WritePosteriorgramCsv(pg, f);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Probabilistic keyword spotting over word lattices", "kws"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "JSON output instead of text");

  IndexArgs ia;
  auto* index_cmd = app.add_subcommand("index", "Build a spot index");
  index_cmd->add_option("-i,--input", ia.input, "Directory of .lat files")
      ->required();
  index_cmd->add_option("-o,--output", ia.output, "Index file to write")
      ->required();
  index_cmd->add_option("--method", ia.method, "Relevance estimator")
      ->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case))
      ->capture_default_str();
  index_cmd->add_option("--gamma", ia.gamma, "Posterior calibration scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  index_cmd
      ->add_option("--peak-threshold", ia.peak_threshold,
                   "Drop marking a significant local maximum")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  index_cmd->add_option("--prune", ia.prune, "Minimum stored score")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  index_cmd->add_option("--threads", ia.threads, "Worker threads (0 = auto)")
      ->check(CLI::NonNegativeNumber);

  SearchArgs sa;
  auto* search_cmd = app.add_subcommand("search", "Query an index");
  search_cmd->add_option("-x,--index", sa.index, "Index file")->required();
  search_cmd->add_option("-q,--query", sa.query, "Keyword")->required();
  search_cmd->add_option("-t,--tau", sa.tau, "Relevance threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  search_cmd->add_option("--limit", sa.limit, "Maximum hits to print");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an index");
  eval_cmd->add_option("-x,--index", ea.index, "Index file")->required();
  eval_cmd->add_option("--queries", ea.queries, "One query word per line")
      ->required();
  eval_cmd->add_option("--qrels", ea.qrels, "word<TAB>region_id lines")
      ->required();
  eval_cmd->add_option("--curve", ea.curve, "Write the global R-P curve CSV");

  SynthConfig sc;
  std::string synth_dir;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic lattice corpus");
  synth_cmd->add_option("-o,--output", synth_dir, "Output directory")
      ->required();
  synth_cmd->add_option("--lines", sc.num_lines)->capture_default_str();
  synth_cmd->add_option("--vocab", sc.vocab_size)->capture_default_str();
  synth_cmd->add_option("--min-words", sc.min_words)->capture_default_str();
  synth_cmd->add_option("--max-words", sc.max_words)->capture_default_str();
  synth_cmd->add_option("--confusion-rate", sc.confusion_rate)
      ->capture_default_str();
  synth_cmd->add_option("--score-noise", sc.score_noise)->capture_default_str();
  synth_cmd->add_option("--margin", sc.confusion_margin)->capture_default_str();
  synth_cmd->add_option("--zipf", sc.zipf_exponent)->capture_default_str();
  synth_cmd->add_option("--seed", sc.seed)->capture_default_str();

  ServeArgs va;
  auto* serve_cmd = app.add_subcommand("serve", "Serve an index over HTTP");
  serve_cmd->add_option("-x,--index", va.index, "Index file")->required();
  serve_cmd->add_option("--host", va.host)->capture_default_str();
  serve_cmd->add_option("--port", va.port)->capture_default_str();

  PgramArgs pa;
  auto* pgram_cmd =
      app.add_subcommand("pgram", "Dump the posteriorgram of one lattice");
  pgram_cmd->add_option("-l,--lattice", pa.lattice, "Lattice file")->required();
  pgram_cmd->add_option("-o,--output", pa.output, "CSV file (default stdout)");
  pgram_cmd->add_option("--gamma", pa.gamma)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*index_cmd) return CmdIndex(ia, json, out, err);
    if (*search_cmd) return CmdSearch(sa, json, out, err);
    if (*eval_cmd) return CmdEval(ea, json, out);
    if (*synth_cmd) return CmdSynth(sc, synth_dir, json, out);
    if (*serve_cmd) return CmdServe(va, out, err);
    if (*pgram_cmd) return CmdPgram(pa, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace kws
