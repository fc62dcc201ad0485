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

#include "geopid/pipeline.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

#include "geopid/error.h"
#include "geopid/random.h"
#include "geopid/serialize.h"

namespace geopid {

void PipelineConfig::Validate() const {
  ValidateEmbeddingLayout(embed.dim, omega);
  Require(gid_length >= 1 && gid_length <= kMaxGeohashLength, "gid_length must be in [1, 12]");
  rq_config().Validate();
  layout().Validate();
  model_config(1).Validate();
  train_config().Validate();
  proximity_config().Validate();
  Require(model.context > layout().pid_length() + gid_length + 1,
          "model context too short for one request and a PID");
}

PidLayout PipelineConfig::layout() const {
  return PidLayout{use_egi ? gid_length : 0, rq.levels, rq.codebook_size, dedup_max};
}

LinearizeOptions PipelineConfig::linearize() const {
  LinearizeOptions o;
  o.location_gid_length = gid_length;
  o.include_history = use_history;
  o.max_tokens = model.context - layout().pid_length();
  return o;
}

RqConfig PipelineConfig::rq_config() const {
  RqConfig c = rq;
  c.input_dim = embed.dim;
  c.seed = DeriveSeed(seed, "rq");
  return c;
}

TransformerConfig PipelineConfig::model_config(int vocab_size) const {
  TransformerConfig c = model;
  c.vocab_size = vocab_size;
  c.seed = DeriveSeed(seed, "model");
  return c;
}

SeqTrainConfig PipelineConfig::train_config() const {
  SeqTrainConfig c = train;
  c.seed = DeriveSeed(seed, "train");
  return c;
}

ProximityConfig PipelineConfig::proximity_config() const {
  ProximityConfig c = proximity;
  c.gid_length = gid_length;
  c.seed = DeriveSeed(seed, "proximity");
  return c;
}

void WriteBundle(const std::string& path, const ModelBundle& b, const std::string& config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  Json header = {{"format", "geopid.bundle"},
                 {"version", kBundleVersion},
                 {"seed", b.seed},
                 {"encoder_activation", "tanh"},
                 {"embed", b.embed},
                 {"omega", b.omega},
                 {"use_geope", b.use_geope},
                 {"use_egi", b.use_egi},
                 {"gid_length", b.gid_length},
                 {"sections", Json::array()},
                 {"config", Json::parse(config_json)}};
  if (b.anchors) header["sections"].push_back("anchors");
  if (b.rq) {
    header["sections"].push_back("rq");
    header["rq"] = b.rq->config;
  }
  if (b.proximity) {
    header["sections"].push_back("proximity");
    header["proximity"] = b.proximity->config();
  }
  out << header.dump() << "\n";
  if (b.anchors) out << Json{{"section", "anchors"}, {"points", AnchorsToJson(*b.anchors)}}.dump() << "\n";
  if (b.rq) out << Json{{"section", "rq"}, {"model", RqModelToJson(*b.rq)}}.dump() << "\n";
  if (b.proximity) {
    out << Json{{"section", "proximity"}, {"model", ProximityToJson(*b.proximity)}}.dump() << "\n";
  }
  if (!out) Throw(ErrorCode::kIo, "write failed for " + path);
}

ModelBundle ReadBundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path);
  const Json header = ReadHeader(in, path, "geopid.bundle", kBundleVersion);
  ModelBundle b;
  try {
    b.seed = header.at("seed").get<uint64_t>();
    b.embed = header.at("embed").get<EmbedConfig>();
    b.omega = header.at("omega").get<int>();
    b.use_geope = header.at("use_geope").get<bool>();
    b.use_egi = header.at("use_egi").get<bool>();
    b.gid_length = header.at("gid_length").get<int>();
    if (header.value("encoder_activation", "") != "tanh") {
      Throw(ErrorCode::kFormat, path + ": unsupported encoder activation");
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      const std::string section = j.at("section").get<std::string>();
      if (section == "anchors") {
        b.anchors = AnchorsFromJson(j.at("points"));
      } else if (section == "rq") {
        b.rq = RqModelFromJson(j.at("model"));
      } else if (section == "proximity") {
        b.proximity = ProximityFromJson(j.at("model"));
      } else {
        Throw(ErrorCode::kFormat, path + ": unknown bundle section " + section);
      }
    }
  } catch (const Json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": " + e.what());
  }
  return b;
}

void WriteCheckpoint(const std::string& path, const Transformer& model, const Vocabulary& vocab,
                     const SeqTrainConfig& train, const LinearizeOptions& linearize,
                     const std::string& config_json) {
  Require(model.config().vocab_size == vocab.size(), "model and vocabulary sizes differ");
  const auto& params = model.params();
  const std::string_view bytes(reinterpret_cast<const char*>(params.data()),
                               params.size() * sizeof(float));
  Json header = {{"format", "geopid.checkpoint"},
                 {"version", kCheckpointVersion},
                 {"model", model.config()},
                 {"train", train},
                 {"linearize", linearize},
                 {"layout", vocab.layout()},
                 {"vocabulary", vocab.Table()},
                 {"dtype", "float32-le"},
                 {"param_count", params.size()},
                 {"checksum", Fnv1a(bytes)},
                 {"config", Json::parse(config_json)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << header.dump() << "\n";
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Throw(ErrorCode::kIo, "write failed for " + path);
}

Checkpoint ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path);
  const Json header = ReadHeader(in, path, "geopid.checkpoint", kCheckpointVersion);
  Checkpoint ck;
  try {
    if (header.at("dtype").get<std::string>() != "float32-le") {
      Throw(ErrorCode::kFormat, path + ": unsupported dtype");
    }
    const auto layout = header.at("layout").get<PidLayout>();
    ck.vocab = Vocabulary::FromTable(layout, header.at("vocabulary").get<std::vector<std::string>>());
    ck.train = header.at("train").get<SeqTrainConfig>();
    ck.linearize = header.at("linearize").get<LinearizeOptions>();
    const auto shape = header.at("model").get<TransformerConfig>();
    if (shape.vocab_size != ck.vocab.size()) {
      Throw(ErrorCode::kFormat, path + ": model vocabulary size disagrees with the table");
    }
    ck.model = std::make_unique<Transformer>(shape);
    auto& params = ck.model->params();
    if (header.at("param_count").get<size_t>() != params.size()) {
      Throw(ErrorCode::kFormat, path + ": parameter count does not match the model shape");
    }
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(float)));
    if (!in || in.peek() != std::char_traits<char>::eof()) {
      Throw(ErrorCode::kFormat, path + ": truncated or oversized parameter payload");
    }
    const std::string_view bytes(reinterpret_cast<const char*>(params.data()),
                                 params.size() * sizeof(float));
    if (Fnv1a(bytes) != header.at("checksum").get<uint64_t>()) {
      Throw(ErrorCode::kFormat, path + ": parameter checksum mismatch");
    }
  } catch (const Json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": " + e.what());
  }
  return ck;
}

std::map<std::string, std::string> ComputeGids(const std::vector<PoiRecord>& pois, int gid_length,
                                               bool use_egi) {
  std::map<std::string, std::string> gids;
  for (const auto& p : pois) {
    gids[p.poi_id] = use_egi ? EncodeGeohash(p.location, gid_length).str() : std::string();
  }
  return gids;
}

std::vector<Embedding> PoiEmbeddings(const std::vector<PoiRecord>& pois, const EmbedConfig& embed,
                                     uint64_t seed, const AnchorSet* anchors) {
  TextEmbedder embedder(embed);
  const uint64_t embed_seed = DeriveSeed(seed, "embed");
  std::vector<Embedding> out;
  out.reserve(pois.size());
  for (const auto& p : pois) {
    Embedding x = embedder.Embed(p.name, p.category, embed_seed);
    out.push_back(anchors ? GeoPeRotate(x, p.location, *anchors) : x);
  }
  return out;
}

Tokenization Tokenize(const std::vector<PoiRecord>& pois, const std::vector<std::string>& texts,
                      const PipelineConfig& cfg) {
  cfg.Validate();
  ValidatePois(pois);
  Tokenization t;
  std::vector<GeoPoint> locations;
  for (const auto& p : pois) locations.push_back(p.location);
  t.anchors = FitAnchors(locations, cfg.omega, DeriveSeed(cfg.seed, "anchors"));
  const auto embeddings =
      PoiEmbeddings(pois, cfg.embed, cfg.seed, cfg.use_geope ? &t.anchors : nullptr);
  t.rq = TrainRq(embeddings, cfg.rq_config(), &t.rq_trace);
  const auto sids = AssignSids(t.rq, pois, embeddings);
  t.pids = BuildPids(pois, ComputeGids(pois, cfg.gid_length, cfg.use_egi), sids, cfg.dedup_max);
  t.vocab = Vocabulary::Build(cfg.layout(), texts);
  t.trie = std::make_shared<const PidTrie>(BuildTrie(t.pids, t.vocab));
  return t;
}

SearchContext ContextFor(const std::vector<Interaction>& history, const Interaction& current,
                         const std::map<std::string, Pid>& pids) {
  SearchContext ctx;
  for (const auto& h : history) {
    auto it = pids.find(h.poi_id);
    Require(it != pids.end(), "history references unknown POI " + h.poi_id);
    ctx.history.push_back({h.query, h.location, it->second});
  }
  ctx.query = current.query;
  ctx.location = current.location;
  return ctx;
}

std::vector<TrainingExample> BuildExamples(const std::vector<LogRecord>& records,
                                           const std::map<std::string, Pid>& pids,
                                           const Vocabulary& vocab,
                                           const LinearizeOptions& options, bool expand_history) {
  std::vector<TrainingExample> out;
  auto add = [&](const std::vector<Interaction>& history, const Interaction& current) {
    auto it = pids.find(current.poi_id);
    Require(it != pids.end(), "log references unknown POI " + current.poi_id);
    out.push_back({Linearize(ContextFor(history, current, pids), vocab, options),
                   PidTokens(it->second, vocab)});
  };
  for (const auto& r : records) {
    if (expand_history) {
      for (size_t i = 0; i < r.history.size(); ++i) {
        add(std::vector<Interaction>(r.history.begin(), r.history.begin() + i), r.history[i]);
      }
    }
    add(r.history, r.current);
  }
  return out;
}

std::vector<ProximitySample> ProximitySamples(const std::vector<LogRecord>& records,
                                              const std::map<std::string, PoiRecord>& pois,
                                              int gid_length) {
  std::vector<ProximitySample> out;
  auto add = [&](const Interaction& it) {
    auto p = pois.find(it.poi_id);
    Require(p != pois.end(), "log references unknown POI " + it.poi_id);
    out.push_back({it.query, LabelProximity(it.location, p->second.location, gid_length)});
  };
  for (const auto& r : records) {
    for (const auto& h : r.history) add(h);
    add(r.current);
  }
  return out;
}

Retriever::Retriever(const Vocabulary& vocab, std::shared_ptr<const PidTrie> trie,
                     const Scorer& scorer, const ProximityModel* proximity,
                     const LinearizeOptions& linearize)
    : vocab_(vocab), trie_(std::move(trie)), scorer_(scorer), proximity_(proximity),
      linearize_(linearize) {
  Require(trie_ != nullptr, "retriever needs a trie");
  Require(scorer_.vocab_size() == vocab_.size(), "scorer and vocabulary sizes differ");
}

std::vector<Token> Retriever::ContextTokens(const SearchContext& ctx) const {
  return Linearize(ctx, vocab_, linearize_);
}

RetrievalResult Retriever::Search(const SearchContext& ctx, const DecodeConfig& config) const {
  const std::vector<Token> context = ContextTokens(ctx);
  const int gid_length = vocab_.layout().gid_length;
  std::vector<Token> prefix;
  int lambda = -1, requested = 0;
  if (config.ssp_enabled && proximity_ != nullptr && gid_length > 0) {
    lambda = std::min(proximity_->Predict(ctx.query), gid_length);
    requested = std::max(0, lambda - config.gamma);
    const auto user = vocab_.EncodeGeohash(EncodeGeohash(ctx.location, gid_length).str());
    prefix = SspPrefix(user, lambda, config.gamma, *trie_);
  }
  RetrievalResult r = BeamSearch(scorer_, *trie_, vocab_, context, prefix, config);
  r.diagnostics.lambda = lambda;
  r.diagnostics.requested_prefix = requested;
  return r;
}

std::vector<LogRecord> RecordsInSplit(const std::vector<LogRecord>& logs, Split split) {
  std::vector<LogRecord> out;
  for (const auto& r : logs) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

Retriever TrainedSystem::MakeRetriever() const {
  return Retriever(tokens.vocab, tokens.trie, *model, proximity ? &*proximity : nullptr,
                   config.linearize());
}

TrainedSystem TrainSystem(const PipelineConfig& cfg, std::vector<PoiRecord> pois,
                          const std::vector<LogRecord>& logs,
                          const std::function<void(const std::string&)>& progress) {
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  TrainedSystem sys;
  sys.config = cfg;
  sys.pois = std::move(pois);
  for (const auto& p : sys.pois) sys.poi_by_id[p.poi_id] = p;

  say("tokenizing " + std::to_string(sys.pois.size()) + " POIs");
  sys.tokens = Tokenize(sys.pois, VocabularyTexts(sys.pois, logs), cfg);

  const auto train = RecordsInSplit(logs, Split::kTrain);
  const auto valid = RecordsInSplit(logs, Split::kValid);
  const LinearizeOptions lin = cfg.linearize();
  const auto train_ex = BuildExamples(train, sys.tokens.pids, sys.tokens.vocab, lin,
                                      cfg.expand_history);
  const auto valid_ex = BuildExamples(valid, sys.tokens.pids, sys.tokens.vocab, lin, false);
  say("training sequence model on " + std::to_string(train_ex.size()) + " examples");
  sys.model = std::make_unique<Transformer>(cfg.model_config(sys.tokens.vocab.size()));
  sys.train_trace = TrainTransformer(*sys.model, std::span<const TrainingExample>(train_ex),
                                     std::span<const TrainingExample>(valid_ex),
                                     cfg.train_config(), [&](int epoch, double loss) {
                                       say("epoch " + std::to_string(epoch + 1) + " loss " +
                                           std::to_string(loss));
                                     });

  if (cfg.use_egi) {
    say("training proximity estimator");
    sys.proximity = TrainProximity(ProximitySamples(train, sys.poi_by_id, cfg.gid_length),
                                   cfg.proximity_config(), &sys.proximity_report);
  }
  return sys;
}

std::vector<std::string> VocabularyTexts(const std::vector<PoiRecord>& pois,
                                         const std::vector<LogRecord>& logs) {
  std::set<std::string> texts;
  for (const auto& p : pois) texts.insert(p.name);
  for (const auto& r : logs) {
    for (const auto& h : r.history) texts.insert(h.query);
    texts.insert(r.current.query);
  }
  return std::vector<std::string>(texts.begin(), texts.end());
}

}  // namespace geopid
