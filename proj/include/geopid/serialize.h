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

#ifndef GEOPID_SERIALIZE_H_
#define GEOPID_SERIALIZE_H_

// JSON conversions for configs and small models, shared by every artifact
// writer. Missing config fields fall back to their defaults on read.

#include <Eigen/Core>
#include <json.hpp>

#include "geopid/anchors.h"
#include "geopid/datagen.h"
#include "geopid/decode.h"
#include "geopid/embed.h"
#include "geopid/mlp.h"
#include "geopid/proximity.h"
#include "geopid/quantizer.h"
#include "geopid/seqmodel.h"
#include "geopid/transformer.h"
#include "geopid/vocab.h"

namespace geopid {

using Json = nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EmbedConfig, dim, min_ngram, max_ngram)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RqConfig, input_dim, hidden_dims, latent_dim,
                                                levels, codebook_size, beta, learning_rate,
                                                epochs, batch_size, kmeans_iters, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PidLayout, gid_length, sid_levels,
                                                codebook_size, dedup_max)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TransformerConfig, vocab_size, layers, heads,
                                                model_dim, context, ff_mult, recency_bias, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SeqTrainConfig, epochs, batch_size,
                                                learning_rate, grad_clip, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProximityConfig, gid_length, feature_dim,
                                                min_ngram, max_ngram, epochs, learning_rate, l2,
                                                heldout_fraction, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DecodeConfig, k, beam_width, tau, gamma,
                                                ssp_enabled, tcg_enabled)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LinearizeOptions, location_gid_length,
                                                include_history, max_tokens)

NLOHMANN_JSON_SERIALIZE_ENUM(Scope, {{Scope::kLocal, "local"},
                                     {Scope::kMid, "mid"},
                                     {Scope::kRegional, "regional"}})
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CategorySpec, name, group, scope, weight, brands)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GenConfig, seed, n_pois, n_cities, city_sigma,
                                                n_sequences, avg_history_len, max_history,
                                                mix_exact, mix_nearby, mix_brand, mix_regional,
                                                group_query_prob, train_fraction,
                                                valid_fraction, taxonomy)

Json MatrixToJson(const Eigen::MatrixXd& m);
Eigen::MatrixXd MatrixFromJson(const Json& j);
Json VectorToJson(const Eigen::VectorXd& v);
Eigen::VectorXd VectorFromJson(const Json& j);

Json AnchorsToJson(const AnchorSet& a);
AnchorSet AnchorsFromJson(const Json& j);
Json MlpToJson(const Mlp& m);
Mlp MlpFromJson(const Json& j);
Json RqModelToJson(const RqModel& m);
RqModel RqModelFromJson(const Json& j);
Json ProximityToJson(const ProximityModel& m);
ProximityModel ProximityFromJson(const Json& j);

// Reads one header line and checks its format name and version. Throws
// Error(kFormat) on mismatch.
Json ReadHeader(std::istream& in, const std::string& path, const std::string& format,
                int version);

}  // namespace geopid

#endif  // GEOPID_SERIALIZE_H_
