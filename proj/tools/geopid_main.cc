// Copyright 2026 The Geopid Authors.
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

// geopid: one subcommand per pipeline stage. Artifacts live under --root
// (or $GEOPID_ROOT) and every output file echoes its config in the header.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geopid/datagen.h"
#include "geopid/error.h"
#include "geopid/eval.h"
#include "geopid/geocode.h"
#include "geopid/pipeline.h"
#include "geopid/random.h"
#include "geopid/serialize.h"

namespace geopid {
namespace {

// Exit statuses. Parse errors come from CLI11; the rest map ErrorCode.
constexpr int kExitUsage = 64;
constexpr int kExitOther = 1;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 65;  // config validation
    case ErrorCode::kIo: return 66;               // missing or unwritable artifact
    case ErrorCode::kFormat: return 67;
    case ErrorCode::kCapacity: return 68;
    case ErrorCode::kConflict: return 69;
    case ErrorCode::kTrainingFailure: return 70;
    case ErrorCode::kDecode: return 71;
  }
  return kExitOther;
}

struct Paths {
  std::string root = ".";
  std::string pois = "pois.jsonl";
  std::string logs = "logs.jsonl";
  std::string bundle = "bundle.jsonl";
  std::string pids = "pids.jsonl";
  std::string trie = "trie.jsonl";
  std::string checkpoint = "model.ckpt";
  std::string results = "results.jsonl";
  std::string report = "report.jsonl";

  std::string At(const std::string& p) const {
    return (std::filesystem::path(root) / p).string();
  }
  // Resolved input path; a missing file is a kIo error.
  std::string In(const std::string& p) const {
    const std::string full = At(p);
    if (!std::filesystem::exists(full)) Throw(ErrorCode::kIo, "missing artifact " + full);
    return full;
  }
  std::string Out(const std::string& p) const {
    const std::string full = At(p);
    const auto dir = std::filesystem::path(full).parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    return full;
  }
};

Json PipelineJson(const PipelineConfig& c) {
  return {{"seed", c.seed},
          {"embed", c.embed},
          {"omega", c.omega},
          {"use_geope", c.use_geope},
          {"use_egi", c.use_egi},
          {"gid_length", c.gid_length},
          {"dedup_max", c.dedup_max},
          {"rq", c.rq},
          {"model", c.model},
          {"train", c.train},
          {"proximity", c.proximity},
          {"use_history", c.use_history},
          {"expand_history", c.expand_history}};
}

// Stage header payload: stage name plus whatever shaped the output.
std::string Echo(const std::string& stage, Json body) {
  body["stage"] = stage;
  return body.dump();
}

void Progress(const std::string& msg) { std::cerr << "[geopid] " << msg << "\n"; }

// Flag groups shared between subcommands.

void AddGenFlags(CLI::App* app, GenConfig& g) {
  app->add_option("--n-pois", g.n_pois, "number of POIs");
  app->add_option("--cities", g.n_cities, "number of city clusters");
  app->add_option("--city-sigma", g.city_sigma, "city spread in degrees of latitude");
  app->add_option("--n-sequences", g.n_sequences, "number of user sequences");
  app->add_option("--avg-history", g.avg_history_len, "mean history length");
  app->add_option("--max-history", g.max_history, "history length cap");
  app->add_option("--group-query-prob", g.group_query_prob,
                  "probability that a nearby query names the group word");
}

void AddTokenizerFlags(CLI::App* app, PipelineConfig& c) {
  app->add_option("--embed-dim", c.embed.dim, "text embedding dimension");
  app->add_option("--omega", c.omega, "number of GeoPE anchors");
  app->add_option("--gid-length", c.gid_length, "geohash length of PIDs");
  app->add_flag("--no-geope{false}", c.use_geope, "skip the positional rotation");
  app->add_flag("--no-egi{false}", c.use_egi, "drop geohash tokens from PIDs");
}

void AddRqFlags(CLI::App* app, PipelineConfig& c) {
  app->add_option("--levels", c.rq.levels, "SID levels");
  app->add_option("--codebook-size", c.rq.codebook_size, "codewords per level");
  app->add_option("--latent-dim", c.rq.latent_dim, "quantized latent dimension");
  app->add_option("--hidden", c.rq.hidden_dims, "encoder hidden widths")->delimiter(',');
  app->add_option("--rq-epochs", c.rq.epochs, "RQ training epochs");
  app->add_option("--rq-lr", c.rq.learning_rate, "RQ learning rate");
  app->add_option("--rq-batch", c.rq.batch_size, "RQ batch size");
  app->add_option("--beta", c.rq.beta, "commitment weight");
}

void AddModelFlags(CLI::App* app, PipelineConfig& c) {
  app->add_option("--layers", c.model.layers, "transformer blocks");
  app->add_option("--heads", c.model.heads, "attention heads");
  app->add_option("--dim", c.model.model_dim, "model width");
  app->add_option("--context", c.model.context, "context length in tokens");
  app->add_option("--epochs", c.train.epochs, "sequence model epochs");
  app->add_option("--batch", c.train.batch_size, "sequence model batch size");
  app->add_option("--lr", c.train.learning_rate, "sequence model learning rate");
  app->add_flag("--no-expand-history{false}", c.expand_history,
                "train only on the final step of each sequence");
}

void AddProximityFlags(CLI::App* app, PipelineConfig& c) {
  app->add_option("--prox-epochs", c.proximity.epochs, "proximity estimator epochs");
  app->add_option("--prox-lr", c.proximity.learning_rate, "proximity estimator learning rate");
  app->add_option("--prox-features", c.proximity.feature_dim, "hashed feature width");
}

void AddDecodeFlags(CLI::App* app, DecodeConfig& d) {
  app->add_option("--beam", d.beam_width, "beam width (0: same as k)");
  app->add_option("--tau", d.tau, "softmax temperature");
  app->add_option("--gamma", d.gamma, "SSP relaxation");
  app->add_flag("--no-ssp{false}", d.ssp_enabled, "disable search-space pruning");
  app->add_flag("--no-tcg{false}", d.tcg_enabled, "disable trie constraints");
}

// Copies tokenizer hyperparameters recorded by fit-anchors into cfg.
void ApplyBundle(const ModelBundle& b, PipelineConfig& cfg) {
  cfg.embed = b.embed;
  cfg.omega = b.omega;
  cfg.use_geope = b.use_geope;
  cfg.use_egi = b.use_egi;
  cfg.gid_length = b.gid_length;
}

void ApplyLayout(const PidLayout& l, PipelineConfig& cfg) {
  cfg.rq.levels = l.sid_levels;
  cfg.rq.codebook_size = l.codebook_size;
  cfg.dedup_max = l.dedup_max;
}

std::map<std::string, PoiRecord> ById(const std::vector<PoiRecord>& pois) {
  std::map<std::string, PoiRecord> out;
  for (const auto& p : pois) out[p.poi_id] = p;
  return out;
}

// ---- stages ----

void RunGenData(const Paths& paths, GenConfig g) {
  g.Validate();
  GenLogsStats stats;
  const auto pois = GenPois(g);
  const auto logs = GenLogs(g, pois, &stats);
  const std::string echo = Echo("gen-data", {{"gen", g}});
  WritePoiFile(paths.Out(paths.pois), pois, echo);
  WriteLogFile(paths.Out(paths.logs), logs, echo);
  std::printf("wrote %zu POIs and %zu sequences (%d retries, %d skipped)\n", pois.size(),
              logs.size(), stats.retries, stats.skipped);
}

void RunFitAnchors(const Paths& paths, PipelineConfig cfg) {
  cfg.Validate();
  const auto pois = ReadPoiFile(paths.In(paths.pois));
  ValidatePois(pois);
  std::vector<GeoPoint> locations;
  for (const auto& p : pois) locations.push_back(p.location);
  ModelBundle b;
  b.seed = cfg.seed;
  b.embed = cfg.embed;
  b.omega = cfg.omega;
  b.use_geope = cfg.use_geope;
  b.use_egi = cfg.use_egi;
  b.gid_length = cfg.gid_length;
  b.anchors = FitAnchors(locations, cfg.omega, DeriveSeed(cfg.seed, "anchors"));
  WriteBundle(paths.Out(paths.bundle), b, Echo("fit-anchors", PipelineJson(cfg)));
  for (const auto& a : b.anchors->points) std::printf("anchor %.6f %.6f\n", a.lat(), a.lon());
}

void RunTrainRq(const Paths& paths, PipelineConfig cfg) {
  const std::string bundle_path = paths.In(paths.bundle);
  ModelBundle b = ReadBundle(bundle_path);
  if (!b.anchors) Throw(ErrorCode::kIo, bundle_path + " has no anchors; run fit-anchors");
  ApplyBundle(b, cfg);
  cfg.Validate();
  const auto pois = ReadPoiFile(paths.In(paths.pois));
  ValidatePois(pois);
  const auto emb = PoiEmbeddings(pois, b.embed, b.seed, b.use_geope ? &*b.anchors : nullptr);
  RqTrainTrace trace;
  b.rq = TrainRq(emb, cfg.rq_config(), &trace);
  WriteBundle(paths.Out(paths.bundle), b, Echo("train-rq", PipelineJson(cfg)));
  for (size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.6f reconstruction %.6f\n", e + 1, trace.epoch_loss[e],
                trace.epoch_reconstruction[e]);
  }
}

void RunTokenize(const Paths& paths, PipelineConfig cfg) {
  const std::string bundle_path = paths.In(paths.bundle);
  const ModelBundle b = ReadBundle(bundle_path);
  if (!b.anchors || !b.rq) Throw(ErrorCode::kIo, bundle_path + " lacks anchors or RQ; run train-rq");
  ApplyBundle(b, cfg);
  cfg.rq.levels = b.rq->config.levels;
  cfg.rq.codebook_size = b.rq->config.codebook_size;
  cfg.Validate();
  const auto pois = ReadPoiFile(paths.In(paths.pois));
  ValidatePois(pois);
  const auto emb = PoiEmbeddings(pois, b.embed, b.seed, b.use_geope ? &*b.anchors : nullptr);
  const auto sids = AssignSids(*b.rq, pois, emb);
  const auto pids =
      BuildPids(pois, ComputeGids(pois, cfg.gid_length, cfg.use_egi), sids, cfg.dedup_max);
  WritePidMap(paths.Out(paths.pids), pids, cfg.layout(), Echo("tokenize", PipelineJson(cfg)));
  int collided = 0;
  for (const auto& [id, pid] : pids) collided += pid.dedup > 0;
  std::printf("%zu PIDs, %d need a nonzero dedup code\n", pids.size(), collided);
}

void RunBuildTrie(const Paths& paths) {
  PidLayout layout;
  const auto pids = ReadPidMap(paths.In(paths.pids), &layout);
  const auto pois = ReadPoiFile(paths.In(paths.pois));
  const auto logs = ReadLogFile(paths.In(paths.logs));
  const Vocabulary vocab = Vocabulary::Build(layout, VocabularyTexts(pois, logs));
  const PidTrie trie = BuildTrie(pids, vocab);
  WriteTrieSnapshot(paths.Out(paths.trie), trie, pids, vocab,
                    Echo("build-trie", {{"layout", layout}}));
  std::printf("trie with %zu leaves, depth %d, vocabulary %d\n", trie.size(), trie.depth(),
              vocab.size());
}

void RunTrainModel(const Paths& paths, PipelineConfig cfg) {
  const ModelBundle b = ReadBundle(paths.In(paths.bundle));
  ApplyBundle(b, cfg);
  Vocabulary vocab;
  const auto trie = ReadTrieSnapshot(paths.In(paths.trie), &vocab);
  ApplyLayout(vocab.layout(), cfg);
  cfg.Validate();
  const auto pids = ReadPidMap(paths.In(paths.pids), nullptr);
  const auto logs = ReadLogFile(paths.In(paths.logs));
  const LinearizeOptions lin = cfg.linearize();
  const auto train = BuildExamples(RecordsInSplit(logs, Split::kTrain), pids, vocab, lin,
                                   cfg.expand_history);
  const auto valid = BuildExamples(RecordsInSplit(logs, Split::kValid), pids, vocab, lin, false);
  Progress("training on " + std::to_string(train.size()) + " examples");
  Transformer model(cfg.model_config(vocab.size()));
  const auto trace = TrainTransformer(
      model, std::span<const TrainingExample>(train), std::span<const TrainingExample>(valid),
      cfg.train_config(), [](int epoch, double loss) {
        Progress("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(loss));
      });
  WriteCheckpoint(paths.Out(paths.checkpoint), model, vocab, cfg.train_config(), lin,
                  Echo("train-model", PipelineJson(cfg)));
  for (size_t e = 0; e < trace.epoch_loss.size(); ++e) {
    std::printf("epoch %zu loss %.6f", e + 1, trace.epoch_loss[e]);
    if (e < trace.heldout_accuracy.size()) {
      std::printf(" heldout_token_accuracy %.4f", trace.heldout_accuracy[e]);
    }
    std::printf("\n");
  }
}

void RunTrainProximity(const Paths& paths, PipelineConfig cfg) {
  const std::string bundle_path = paths.In(paths.bundle);
  ModelBundle b = ReadBundle(bundle_path);
  ApplyBundle(b, cfg);
  cfg.Validate();
  const auto pois = ById(ReadPoiFile(paths.In(paths.pois)));
  const auto logs = ReadLogFile(paths.In(paths.logs));
  ProximityReport report;
  b.proximity = TrainProximity(
      ProximitySamples(RecordsInSplit(logs, Split::kTrain), pois, cfg.gid_length),
      cfg.proximity_config(), &report);
  WriteBundle(paths.Out(paths.bundle), b, Echo("train-proximity", PipelineJson(cfg)));
  std::printf("train %zu heldout %zu accuracy train %.4f heldout %.4f majority %.4f\n",
              report.train_size, report.heldout_size, report.train_accuracy,
              report.heldout_accuracy, report.majority_accuracy);
}

// Loaded query-time artifacts. The retriever points into this struct, so
// it stays put once built.
struct Runtime {
  ModelBundle bundle;
  Checkpoint checkpoint;
  std::shared_ptr<const PidTrie> trie;
  std::map<std::string, PoiRecord> pois;
};

void LoadRuntime(const Paths& paths, Runtime& rt) {
  rt.bundle = ReadBundle(paths.In(paths.bundle));
  rt.checkpoint = ReadCheckpoint(paths.In(paths.checkpoint));
  Vocabulary trie_vocab;
  rt.trie = std::make_shared<const PidTrie>(ReadTrieSnapshot(paths.In(paths.trie), &trie_vocab));
  if (trie_vocab.Table() != rt.checkpoint.vocab.Table() ||
      !(trie_vocab.layout() == rt.checkpoint.vocab.layout())) {
    Throw(ErrorCode::kFormat, "trie and checkpoint vocabularies differ");
  }
  rt.pois = ById(ReadPoiFile(paths.In(paths.pois)));
}

Retriever MakeRetriever(const Runtime& rt, bool include_history) {
  LinearizeOptions lin = rt.checkpoint.linearize;
  lin.include_history = lin.include_history && include_history;
  return Retriever(rt.checkpoint.vocab, rt.trie, *rt.checkpoint.model,
                   rt.bundle.proximity ? &*rt.bundle.proximity : nullptr, lin);
}

void RunSearch(const Paths& paths, const std::string& query, double lat, double lon,
               DecodeConfig d) {
  d.Validate();
  Runtime rt;
  LoadRuntime(paths, rt);
  const Retriever retriever = MakeRetriever(rt, true);
  SearchContext ctx;
  ctx.query = query;
  ctx.location = GeoPoint(lat, lon);
  const RetrievalResult r = retriever.Search(ctx, d);
  std::printf("# lambda %d prefix %d steps %d %.3f ms\n", r.diagnostics.lambda,
              r.diagnostics.prefix_length, r.diagnostics.steps, r.diagnostics.wall_ms);
  std::printf("%-4s %-10s %-36s %12s %10s\n", "rank", "poi_id", "name", "distance_m", "log_prob");
  int rank = 0;
  for (const auto& item : r.items) {
    ++rank;
    if (!item.poi_id) {
      std::string pid;
      for (Token t : item.pid_tokens) pid += retriever.vocab().TokenString(t) + " ";
      std::printf("%-4d %-10s %-36s %12s %10.4f\n", rank, "-", ("<invalid " + pid + ">").c_str(),
                  "-", item.log_prob);
      continue;
    }
    const PoiRecord& p = rt.pois.at(*item.poi_id);
    std::printf("%-4d %-10s %-36s %12.1f %10.4f\n", rank, p.poi_id.c_str(), p.name.c_str(),
                HaversineDistance(ctx.location, p.location), item.log_prob);
  }
}

void RunPredictLambda(const Paths& paths, const std::string& query) {
  const std::string bundle_path = paths.In(paths.bundle);
  const ModelBundle b = ReadBundle(bundle_path);
  if (!b.proximity) Throw(ErrorCode::kIo, bundle_path + " has no proximity model");
  const auto scores = b.proximity->Scores(query);
  std::printf("lambda %d\n", b.proximity->Predict(query));
  for (int l = 0; l < scores.size(); ++l) std::printf("level %d score %.6f\n", l, scores[l]);
}

struct EvalOptions {
  std::vector<int> ks = {5, 10, 20};
  size_t max_queries = 0;
  bool from_artifacts = false;
  bool no_history = false;
};

void Emit(const Paths& paths, std::span<const QueryOutcome> outcomes, const EvalFlags& flags,
          const std::string& echo) {
  WriteResults(paths.Out(paths.results), outcomes, flags, echo);
  const EvalReport report = Summarize(outcomes, flags);
  WriteReport(paths.Out(paths.report), report, echo);
  std::printf("%s", report.Table().c_str());
}

void RunEvaluate(const Paths& paths, const GenConfig& gen, PipelineConfig cfg, DecodeConfig d,
                 const EvalOptions& opt) {
  d.Validate();
  Require(!opt.ks.empty(), "need at least one k");
  EvalFlags flags;
  flags.tcg = d.tcg_enabled;
  flags.ssp = d.ssp_enabled;
  flags.history = !opt.no_history;
  Json echo = {{"decode", d}, {"ks", opt.ks}, {"max_queries", opt.max_queries}};

  if (opt.from_artifacts) {
    Runtime rt;
    LoadRuntime(paths, rt);
    flags.egi = rt.bundle.use_egi;
    flags.geope = rt.bundle.use_geope;
    const auto logs = ReadLogFile(paths.In(paths.logs));
    const auto pids = ReadPidMap(paths.In(paths.pids), nullptr);
    const Retriever retriever = MakeRetriever(rt, !opt.no_history);
    const auto queries = QueriesFor(RecordsInSplit(logs, Split::kTest), pids, opt.max_queries);
    Progress("evaluating " + std::to_string(queries.size()) + " queries");
    const auto outcomes = RunQueries(retriever, rt.pois, queries, opt.ks, d);
    echo["from_artifacts"] = true;
    Emit(paths, outcomes, flags, Echo("evaluate", echo));
    return;
  }

  cfg.use_history = !opt.no_history;
  cfg.Validate();
  gen.Validate();
  flags.egi = cfg.use_egi;
  flags.geope = cfg.use_geope;
  Progress("generating corpus");
  auto pois = GenPois(gen);
  const auto logs = GenLogs(gen, pois);
  TrainedSystem sys = TrainSystem(cfg, std::move(pois), logs, Progress);
  const Retriever retriever = sys.MakeRetriever();
  const auto queries =
      QueriesFor(RecordsInSplit(logs, Split::kTest), sys.tokens.pids, opt.max_queries);
  Progress("evaluating " + std::to_string(queries.size()) + " queries");
  const auto outcomes = RunQueries(retriever, sys.poi_by_id, queries, opt.ks, d);
  echo["gen"] = gen;
  echo["pipeline"] = PipelineJson(cfg);
  Emit(paths, outcomes, flags, Echo("evaluate", echo));
}

void RunStats(const Paths& paths) {
  const auto pois = ReadPoiFile(paths.In(paths.pois));
  std::map<std::string, int> by_category;
  for (const auto& p : pois) ++by_category[p.category];
  std::printf("pois %zu\n", pois.size());
  for (const auto& [c, n] : by_category) std::printf("  category %-14s %d\n", c.c_str(), n);

  if (std::filesystem::exists(paths.At(paths.logs))) {
    const auto logs = ReadLogFile(paths.At(paths.logs));
    std::map<std::string, int> splits, kinds;
    size_t history = 0;
    for (const auto& r : logs) {
      ++splits[SplitName(r.split)];
      ++kinds[QueryTemplateName(r.current.kind)];
      history += r.history.size();
    }
    std::printf("sequences %zu mean_history %.3f\n", logs.size(),
                logs.empty() ? 0.0 : static_cast<double>(history) / logs.size());
    for (const auto& [s, n] : splits) std::printf("  split %-8s %d\n", s.c_str(), n);
    for (const auto& [k, n] : kinds) std::printf("  template %-16s %d\n", k.c_str(), n);
  }
  if (std::filesystem::exists(paths.At(paths.pids))) {
    PidLayout layout;
    const auto pids = ReadPidMap(paths.At(paths.pids), &layout);
    std::set<std::string> cells;
    std::vector<std::set<int>> used(layout.sid_levels);
    int max_dedup = 0;
    for (const auto& [id, pid] : pids) {
      cells.insert(pid.gid);
      for (int l = 0; l < layout.sid_levels; ++l) used[l].insert(pid.sid.indices[l]);
      max_dedup = std::max(max_dedup, pid.dedup);
    }
    std::printf("pids %zu gid_length %d cells %zu max_dedup %d\n", pids.size(), layout.gid_length,
                cells.size(), max_dedup);
    for (int l = 0; l < layout.sid_levels; ++l) {
      std::printf("  sid level %d uses %zu of %d codes\n", l + 1, used[l].size(),
                  layout.codebook_size);
    }
  }
  if (std::filesystem::exists(paths.At(paths.trie))) {
    Vocabulary vocab;
    const auto trie = ReadTrieSnapshot(paths.At(paths.trie), &vocab);
    std::printf("trie leaves %zu depth %d vocabulary %d\n", trie.size(), trie.depth(),
                vocab.size());
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"Generative POI retrieval with geo-semantic identifiers"};
  app.require_subcommand(1);
  app.fallthrough();

  Paths paths;
  uint64_t seed = 0;
  app.add_option("--seed", seed, "global seed fanned out to every stage");
  app.add_option("--root", paths.root, "artifact directory")->envname("GEOPID_ROOT");
  app.add_option("--pois", paths.pois, "POI database file");
  app.add_option("--logs", paths.logs, "search log file");
  app.add_option("--bundle", paths.bundle, "tokenizer bundle file");
  app.add_option("--pids", paths.pids, "PID map file");
  app.add_option("--trie", paths.trie, "trie snapshot file");
  app.add_option("--checkpoint", paths.checkpoint, "sequence model checkpoint");
  app.add_option("--results", paths.results, "per-query results file");
  app.add_option("--report", paths.report, "report record file");

  GenConfig gen;
  PipelineConfig cfg;
  DecodeConfig decode;
  EvalOptions eval;
  std::string query;
  double lat = 0, lon = 0;

  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic POI database and logs");
  AddGenFlags(gen_cmd, gen);
  auto* anchors_cmd = app.add_subcommand("fit-anchors", "fit GeoPE anchor points");
  AddTokenizerFlags(anchors_cmd, cfg);
  auto* rq_cmd = app.add_subcommand("train-rq", "train the residual quantizer");
  AddRqFlags(rq_cmd, cfg);
  auto* tok_cmd = app.add_subcommand("tokenize", "assign PIDs to every POI");
  tok_cmd->add_option("--dedup-max", cfg.dedup_max, "dedup codes per (GID, SID) cell");
  auto* trie_cmd = app.add_subcommand("build-trie", "build the vocabulary and PID trie");
  auto* model_cmd = app.add_subcommand("train-model", "train the sequence model");
  AddModelFlags(model_cmd, cfg);
  model_cmd->add_flag("--no-history{false}", cfg.use_history, "train without history");
  auto* prox_cmd = app.add_subcommand("train-proximity", "train the proximity estimator");
  AddProximityFlags(prox_cmd, cfg);
  auto* search_cmd = app.add_subcommand("search", "retrieve POIs for one query");
  search_cmd->add_option("--query", query, "query text")->required();
  search_cmd->add_option("--lat", lat, "user latitude")->required();
  search_cmd->add_option("--lon", lon, "user longitude")->required();
  search_cmd->add_option("--k", decode.k, "results to return");
  AddDecodeFlags(search_cmd, decode);
  auto* lambda_cmd = app.add_subcommand("predict-lambda", "predict the proximity level");
  lambda_cmd->add_option("--query", query, "query text")->required();
  auto* eval_cmd = app.add_subcommand("evaluate", "run the evaluation harness");
  eval_cmd->add_flag("--from-artifacts", eval.from_artifacts,
                     "use persisted artifacts instead of training end to end");
  eval_cmd->add_option("--ks", eval.ks, "cutoffs, comma separated")->delimiter(',');
  eval_cmd->add_option("--max-queries", eval.max_queries, "limit on test queries (0: all)");
  eval_cmd->add_flag("--no-history", eval.no_history, "drop history from contexts");
  AddGenFlags(eval_cmd, gen);
  AddTokenizerFlags(eval_cmd, cfg);
  AddRqFlags(eval_cmd, cfg);
  eval_cmd->add_option("--dedup-max", cfg.dedup_max, "dedup codes per (GID, SID) cell");
  AddModelFlags(eval_cmd, cfg);
  AddProximityFlags(eval_cmd, cfg);
  AddDecodeFlags(eval_cmd, decode);
  auto* stats_cmd = app.add_subcommand("stats", "summarize artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  gen.seed = seed;
  cfg.seed = seed;
  try {
    if (*gen_cmd) RunGenData(paths, gen);
    if (*anchors_cmd) RunFitAnchors(paths, cfg);
    if (*rq_cmd) RunTrainRq(paths, cfg);
    if (*tok_cmd) RunTokenize(paths, cfg);
    if (*trie_cmd) RunBuildTrie(paths);
    if (*model_cmd) RunTrainModel(paths, cfg);
    if (*prox_cmd) RunTrainProximity(paths, cfg);
    if (*search_cmd) RunSearch(paths, query, lat, lon, decode);
    if (*lambda_cmd) RunPredictLambda(paths, query);
    if (*eval_cmd) RunEvaluate(paths, gen, cfg, decode, eval);
    if (*stats_cmd) RunStats(paths);
  } catch (const Error& e) {
    std::fprintf(stderr, "geopid: %s: %s\n", ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "geopid: %s\n", e.what());
    return kExitOther;
  }
  return 0;
}

}  // namespace
}  // namespace geopid

int main(int argc, char** argv) { return geopid::Main(argc, argv); }
