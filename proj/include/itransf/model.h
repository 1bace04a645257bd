// Copyright 2026 The itransf-kbc Authors.
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
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itransf/kb_data.h"
#include "json.hpp"

namespace itransf {

enum class ModelKind { kITransF, kTransE, kSTransE };
enum class AttentionMode { kSparse, kDense, kDenseL1 };
enum class SamplingMode { kUniform, kBernoulli, kDomain };
enum class Side { kHead, kTail };

std::string_view to_string(ModelKind v);
std::string_view to_string(AttentionMode v);
std::string_view to_string(SamplingMode v);
std::string_view to_string(Side v);
ModelKind parse_model_kind(std::string_view s);
AttentionMode parse_attention_mode(std::string_view s);
SamplingMode parse_sampling_mode(std::string_view s);

// Unlimited sample budget for single-matrix costs.
inline constexpr int kUnlimitedBudget = -1;

struct Hyperparams {
  ModelKind model = ModelKind::kITransF;
  int dim = 50;            // n
  int num_concepts = 30;   // m
  int max_active = 2;      // k, ℓ0 bound on each assignment vector
  double margin = 5.0;     // γ
  double temperature = 0.25;  // τ
  int norm = 1;            // ℓ ∈ {1, 2}
  double lr = 0.01;
  int batch_size = 20;
  int epochs = 2000;
  int block_every = 5;
  int block_stop = -1;     // last epoch with a block update; -1 means epochs / 2
  double init_noise_sd = 0.005;
  SamplingMode sampling = SamplingMode::kBernoulli;
  bool domain_uniform_side = false;  // domain mode: pick side by coin instead of Bernoulli rule
  double domain_lambda = 0.001;
  AttentionMode attention = AttentionMode::kSparse;
  double l1_coef = 0.001;
  double proj_penalty = 1.0;  // weight of the projected-norm hinge penalty
  int cost_budget = 500;      // per-relation triples in a single-matrix cost

  // Throws ArgumentError when an invariant is violated.
  void validate() const;
  int effective_block_stop() const { return block_stop < 0 ? epochs / 2 : block_stop; }
  bool uses_projection() const { return model != ModelKind::kTransE; }
};

nlohmann::json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

// All learnable state. Arrays are row-major:
//   entity      [num_entities][dim]
//   relation    [num_relations][dim]
//   concepts    [num_concepts][dim][dim]
//   scores      [num_relations][num_concepts] per side (pre-softmax v, or
//               raw weights in dense_l1 mode)
//   assignments [num_relations][num_concepts] per side, 0/1
struct ModelParams {
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t dim = 0;
  std::size_t num_concepts = 0;

  std::vector<double> entity;
  std::vector<double> relation;
  std::vector<double> concepts;
  std::vector<double> head_scores, tail_scores;
  std::vector<std::uint8_t> head_assign, tail_assign;

  std::span<double> entity_row(EntityId e) { return {entity.data() + e * dim, dim}; }
  std::span<const double> entity_row(EntityId e) const { return {entity.data() + e * dim, dim}; }
  std::span<double> relation_row(RelationId r) { return {relation.data() + r * dim, dim}; }
  std::span<const double> relation_row(RelationId r) const {
    return {relation.data() + r * dim, dim};
  }
  std::span<double> concept_matrix(std::size_t i) {
    return {concepts.data() + i * dim * dim, dim * dim};
  }
  std::span<const double> concept_matrix(std::size_t i) const {
    return {concepts.data() + i * dim * dim, dim * dim};
  }
  std::span<double> scores(Side s, RelationId r) {
    auto& v = s == Side::kHead ? head_scores : tail_scores;
    return {v.data() + r * num_concepts, num_concepts};
  }
  std::span<const double> scores(Side s, RelationId r) const {
    const auto& v = s == Side::kHead ? head_scores : tail_scores;
    return {v.data() + r * num_concepts, num_concepts};
  }
  std::span<std::uint8_t> assignment(Side s, RelationId r) {
    auto& v = s == Side::kHead ? head_assign : tail_assign;
    return {v.data() + r * num_concepts, num_concepts};
  }
  std::span<const std::uint8_t> assignment(Side s, RelationId r) const {
    const auto& v = s == Side::kHead ? head_assign : tail_assign;
    return {v.data() + r * num_concepts, num_concepts};
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Concept count implied by the model kind: m for ITransF, 2|R| for STransE
// (one head and one tail matrix per relation), 0 for TransE.
std::size_t concept_count(const Hyperparams& hp, std::size_t num_relations);

// Concept matrices start at identity plus N(0, init_noise_sd²) noise; entity
// and relation rows are uniform in ±6/√n then unit-normalized, or copied from
// warm_start (entity rows renormalized). Scores start at 0 and every relation gets a
// random k-hot assignment per side. STransE uses fixed disjoint one-hot
// assignments; dense modes activate every concept.
ModelParams init_params(std::size_t num_entities, std::size_t num_relations,
                        const Hyperparams& hp, std::uint64_t seed,
                        const ModelParams* warm_start = nullptr);

// α_i = exp(v_i/τ)·I_i / Σ_j exp(v_j/τ)·I_j. Writes into out (size m).
// Throws DomainError if no bit is set, ArgumentError if tau <= 0.
void sparse_softmax(std::span<const double> scores, std::span<const std::uint8_t> active,
                    double tau, std::span<double> out);
std::vector<double> sparse_softmax(std::span<const double> scores,
                                   std::span<const std::uint8_t> active, double tau);

// Attention vector of one side of relation r under hp.attention.
void attention(const ModelParams& p, const Hyperparams& hp, Side side, RelationId r,
               std::span<double> out);

// y = Σ_i alpha_i (D_i e), skipping zero weights. out must not alias e.
void project(std::span<const double> alpha, std::span<const double> concepts, std::size_t dim,
             std::span<const double> e, std::span<double> out);

// y = M e for a single n×n matrix.
void matvec(std::span<const double> matrix, std::span<const double> e, std::span<double> out);

double vector_norm(std::span<const double> u, int ell);

// ‖a + r − b‖_ℓ evaluated as (a_i + r_i) − b_i. Every energy path goes
// through this so that equal inputs give bitwise-equal energies.
inline double residual_norm(std::span<const double> a, std::span<const double> r,
                            std::span<const double> b, int ell) {
  double s = 0;
  if (ell == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] + r[i] - b[i]);
    return s;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] + r[i] - b[i];
    s += u * u;
  }
  return std::sqrt(s);
}

// Per-relation attention pair, computed once and reused across triples.
struct RelationAttention {
  std::vector<double> head;
  std::vector<double> tail;
};
RelationAttention relation_attention(const ModelParams& p, const Hyperparams& hp, RelationId r);

double energy_transe(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                     const Hyperparams& hp);
// ‖W_{r,1} h + r − W_{r,2} t‖ with W_{r,1} = D_{2r}, W_{r,2} = D_{2r+1}.
double energy_stranse(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp);
double energy_itransf(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp);
// ITransF energy using precomputed attention for r.
double energy_itransf(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp, const RelationAttention& att);

// Energy of whichever model hp.model names.
double energy(const Triple& x, const ModelParams& p, const Hyperparams& hp);

// Energy with one side's projection replaced by the bare concept matrix D_i,
// keeping the other side's current attention.
double single_matrix_energy(Side side, std::size_t concept_id, EntityId h, RelationId r,
                            EntityId t, const ModelParams& p, const Hyperparams& hp);
double single_matrix_energy(Side side, std::size_t concept_id, EntityId h, RelationId r,
                            EntityId t, const ModelParams& p, const Hyperparams& hp,
                            const RelationAttention& att);

struct AttentionSnapshot {
  std::size_t num_concepts = 0;
  std::vector<std::vector<double>> head;  // [relation][concept]
  std::vector<std::vector<double>> tail;
};

AttentionSnapshot attention_snapshot(const ModelParams& p, const Hyperparams& hp);

}  // namespace itransf
