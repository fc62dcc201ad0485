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

#ifndef GEOPID_PIPELINE_H_
#define GEOPID_PIPELINE_H_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geopid/anchors.h"
#include "geopid/datagen.h"
#include "geopid/decode.h"
#include "geopid/embed.h"
#include "geopid/pid.h"
#include "geopid/poi.h"
#include "geopid/proximity.h"
#include "geopid/quantizer.h"
#include "geopid/seqmodel.h"
#include "geopid/transformer.h"
#include "geopid/vocab.h"

namespace geopid {

// Hyperparameters of every stage after data generation. One seed fans out
// to each stage.
struct PipelineConfig {
  uint64_t seed = 0;
  EmbedConfig embed;
  int omega = 8;
  bool use_geope = true;
  bool use_egi = true;
  int gid_length = 6;
  int dedup_max = 16;
  RqConfig rq;
  TransformerConfig model;  // vocab_size is filled in from the vocabulary
  SeqTrainConfig train;
  ProximityConfig proximity;
  bool use_history = true;
  // Also train on every earlier step of each training sequence.
  bool expand_history = true;

  void Validate() const;
  PidLayout layout() const;
  LinearizeOptions linearize() const;
  // Stage configs with the seed and shared dimensions applied.
  RqConfig rq_config() const;
  TransformerConfig model_config(int vocab_size) const;
  SeqTrainConfig train_config() const;
  ProximityConfig proximity_config() const;
};

// Tokenizer state persisted in the model bundle file.
struct ModelBundle {
  uint64_t seed = 0;
  EmbedConfig embed;
  int omega = 8;
  bool use_geope = true;
  bool use_egi = true;
  int gid_length = 6;
  std::optional<AnchorSet> anchors;
  std::optional<RqModel> rq;
  std::optional<ProximityModel> proximity;
};

inline constexpr int kBundleVersion = 1;
// Structured-text bundle: a header line with every hyperparameter and the
// encoder activation name, then one JSON line per present section.
void WriteBundle(const std::string& path, const ModelBundle& bundle,
                 const std::string& config_json = "{}");
ModelBundle ReadBundle(const std::string& path);

// Sequence-model checkpoint: a JSON header line (shape, training config,
// linearization, vocabulary table, payload size and checksum) followed by
// the raw little-endian float32 parameters.
struct Checkpoint {
  Vocabulary vocab;
  std::unique_ptr<Transformer> model;
  SeqTrainConfig train;
  LinearizeOptions linearize;
};

inline constexpr int kCheckpointVersion = 1;
void WriteCheckpoint(const std::string& path, const Transformer& model, const Vocabulary& vocab,
                     const SeqTrainConfig& train, const LinearizeOptions& linearize,
                     const std::string& config_json = "{}");
Checkpoint ReadCheckpoint(const std::string& path);

// Geohash GIDs at length gid_length, or empty strings when EGI is off.
std::map<std::string, std::string> ComputeGids(const std::vector<PoiRecord>& pois, int gid_length,
                                               bool use_egi);
// Text embedding of each POI, GeoPE-rotated when anchors are given.
std::vector<Embedding> PoiEmbeddings(const std::vector<PoiRecord>& pois, const EmbedConfig& embed,
                                     uint64_t seed, const AnchorSet* anchors);

struct Tokenization {
  AnchorSet anchors;
  RqModel rq;
  RqTrainTrace rq_trace;
  std::map<std::string, Pid> pids;
  Vocabulary vocab;
  std::shared_ptr<const PidTrie> trie;
};

// Anchors, embeddings, RQ training, SIDs, GIDs, PIDs, vocabulary and trie.
// texts seed the character vocabulary (queries and names).
Tokenization Tokenize(const std::vector<PoiRecord>& pois, const std::vector<std::string>& texts,
                      const PipelineConfig& cfg);

// Resolves history poi_ids to PIDs. Throws Error(kInvalidArgument) for an
// unknown poi_id.
SearchContext ContextFor(const std::vector<Interaction>& history, const Interaction& current,
                         const std::map<std::string, Pid>& pids);

// One example per record; with expand_history also one per earlier step.
std::vector<TrainingExample> BuildExamples(const std::vector<LogRecord>& records,
                                           const std::map<std::string, Pid>& pids,
                                           const Vocabulary& vocab,
                                           const LinearizeOptions& options, bool expand_history);

std::vector<ProximitySample> ProximitySamples(const std::vector<LogRecord>& records,
                                              const std::map<std::string, PoiRecord>& pois,
                                              int gid_length);

// Query-time wiring of scorer, trie and proximity model.
class Retriever {
 public:
  Retriever(const Vocabulary& vocab, std::shared_ptr<const PidTrie> trie, const Scorer& scorer,
            const ProximityModel* proximity, const LinearizeOptions& linearize);

  // SSP is applied only when the config enables it, a proximity model is
  // present and PIDs carry geohash tokens.
  RetrievalResult Search(const SearchContext& ctx, const DecodeConfig& config) const;
  std::vector<Token> ContextTokens(const SearchContext& ctx) const;

  const Vocabulary& vocab() const { return vocab_; }

 private:
  const Vocabulary& vocab_;
  std::shared_ptr<const PidTrie> trie_;
  const Scorer& scorer_;
  const ProximityModel* proximity_;
  LinearizeOptions linearize_;
};

// Everything trained from one POI database and log set.
struct TrainedSystem {
  PipelineConfig config;
  std::vector<PoiRecord> pois;
  std::map<std::string, PoiRecord> poi_by_id;
  Tokenization tokens;
  std::unique_ptr<Transformer> model;
  SeqTrainTrace train_trace;
  std::optional<ProximityModel> proximity;
  ProximityReport proximity_report;

  Retriever MakeRetriever() const;
};

// Runs Tokenize, trains the sequence model on the train split (held-out
// accuracy on the validation split) and the proximity model. progress may
// be empty.
TrainedSystem TrainSystem(const PipelineConfig& cfg, std::vector<PoiRecord> pois,
                          const std::vector<LogRecord>& logs,
                          const std::function<void(const std::string&)>& progress = {});

std::vector<LogRecord> RecordsInSplit(const std::vector<LogRecord>& logs, Split split);

std::vector<std::string> VocabularyTexts(const std::vector<PoiRecord>& pois,
                                         const std::vector<LogRecord>& logs);

}  // namespace geopid

#endif  // GEOPID_PIPELINE_H_
