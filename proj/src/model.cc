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
#include "itransf/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "itransf/errors.h"

namespace itransf {

std::string_view to_string(ModelKind v) {
  switch (v) {
    case ModelKind::kITransF: return "itransf";
    case ModelKind::kTransE: return "transe";
    case ModelKind::kSTransE: return "stranse";
  }
  return "?";
}

std::string_view to_string(AttentionMode v) {
  switch (v) {
    case AttentionMode::kSparse: return "sparse";
    case AttentionMode::kDense: return "dense";
    case AttentionMode::kDenseL1: return "dense_l1";
  }
  return "?";
}

std::string_view to_string(SamplingMode v) {
  switch (v) {
    case SamplingMode::kUniform: return "uniform";
    case SamplingMode::kBernoulli: return "bernoulli";
    case SamplingMode::kDomain: return "domain";
  }
  return "?";
}

std::string_view to_string(Side v) { return v == Side::kHead ? "head" : "tail"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "itransf") return ModelKind::kITransF;
  if (s == "transe") return ModelKind::kTransE;
  if (s == "stranse") return ModelKind::kSTransE;
  throw ArgumentError("unknown model kind: " + std::string(s));
}

AttentionMode parse_attention_mode(std::string_view s) {
  if (s == "sparse") return AttentionMode::kSparse;
  if (s == "dense") return AttentionMode::kDense;
  if (s == "dense_l1") return AttentionMode::kDenseL1;
  throw ArgumentError("unknown attention mode: " + std::string(s));
}

SamplingMode parse_sampling_mode(std::string_view s) {
  if (s == "uniform") return SamplingMode::kUniform;
  if (s == "bernoulli") return SamplingMode::kBernoulli;
  if (s == "domain") return SamplingMode::kDomain;
  throw ArgumentError("unknown sampling mode: " + std::string(s));
}

void Hyperparams::validate() const {
  auto fail = [](const std::string& m) { throw ArgumentError("invalid hyperparameter: " + m); };
  if (dim < 1) fail("dim must be >= 1");
  if (model == ModelKind::kITransF) {
    if (num_concepts < 1) fail("num_concepts must be >= 1");
    if (max_active < 1 || max_active > num_concepts) fail("k must satisfy 1 <= k <= m");
  }
  if (!(temperature > 0)) fail("temperature must be > 0");
  if (!(margin > 0)) fail("margin must be > 0");
  if (norm != 1 && norm != 2) fail("norm must be 1 or 2");
  if (!(lr >= 0)) fail("lr must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (block_every < 1) fail("block_every must be >= 1");
  if (!(init_noise_sd >= 0)) fail("init_noise_sd must be >= 0");
  if (!(domain_lambda >= 0)) fail("lambda must be >= 0");
  if (!(l1_coef >= 0)) fail("l1_coef must be >= 0");
  if (!(proj_penalty >= 0)) fail("proj_penalty must be >= 0");
  if (cost_budget < 1 && cost_budget != kUnlimitedBudget) fail("cost_budget must be >= 1 or -1");
}

nlohmann::json to_json(const Hyperparams& hp) {
  return {
      {"model", to_string(hp.model)},
      {"dim", hp.dim},
      {"num_concepts", hp.num_concepts},
      {"max_active", hp.max_active},
      {"margin", hp.margin},
      {"temperature", hp.temperature},
      {"norm", hp.norm},
      {"lr", hp.lr},
      {"batch_size", hp.batch_size},
      {"epochs", hp.epochs},
      {"block_every", hp.block_every},
      {"block_stop", hp.block_stop},
      {"init_noise_sd", hp.init_noise_sd},
      {"sampling", to_string(hp.sampling)},
      {"domain_uniform_side", hp.domain_uniform_side},
      {"domain_lambda", hp.domain_lambda},
      {"attention", to_string(hp.attention)},
      {"l1_coef", hp.l1_coef},
      {"proj_penalty", hp.proj_penalty},
      {"cost_budget", hp.cost_budget},
  };
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  Hyperparams hp;
  hp.model = parse_model_kind(j.at("model").get<std::string>());
  hp.dim = j.at("dim");
  hp.num_concepts = j.at("num_concepts");
  hp.max_active = j.at("max_active");
  hp.margin = j.at("margin");
  hp.temperature = j.at("temperature");
  hp.norm = j.at("norm");
  hp.lr = j.at("lr");
  hp.batch_size = j.at("batch_size");
  hp.epochs = j.at("epochs");
  hp.block_every = j.at("block_every");
  hp.block_stop = j.at("block_stop");
  hp.init_noise_sd = j.at("init_noise_sd");
  hp.sampling = parse_sampling_mode(j.at("sampling").get<std::string>());
  hp.domain_uniform_side = j.at("domain_uniform_side");
  hp.domain_lambda = j.at("domain_lambda");
  hp.attention = parse_attention_mode(j.at("attention").get<std::string>());
  hp.l1_coef = j.at("l1_coef");
  hp.proj_penalty = j.at("proj_penalty");
  hp.cost_budget = j.at("cost_budget");
  return hp;
}

std::size_t concept_count(const Hyperparams& hp, std::size_t num_relations) {
  switch (hp.model) {
    case ModelKind::kITransF: return static_cast<std::size_t>(hp.num_concepts);
    case ModelKind::kSTransE: return 2 * num_relations;
    case ModelKind::kTransE: return 0;
  }
  return 0;
}

namespace {

void normalize(std::span<double> row) {
  double s = 0;
  for (double x : row) s += x * x;
  s = std::sqrt(s);
  if (s > 0) {
    for (double& x : row) x /= s;
  }
}

}  // namespace

ModelParams init_params(std::size_t num_entities, std::size_t num_relations,
                        const Hyperparams& hp, std::uint64_t seed,
                        const ModelParams* warm_start) {
  hp.validate();
  ModelParams p;
  p.num_entities = num_entities;
  p.num_relations = num_relations;
  p.dim = static_cast<std::size_t>(hp.dim);
  p.num_concepts = concept_count(hp, num_relations);
  const std::size_t n = p.dim;
  const std::size_t m = p.num_concepts;

  std::mt19937_64 rng(seed);

  p.entity.resize(num_entities * n);
  p.relation.resize(num_relations * n);
  if (warm_start != nullptr) {
    if (warm_start->dim != n || warm_start->num_entities != num_entities ||
        warm_start->num_relations != num_relations) {
      throw InitError("warm start shape (" + std::to_string(warm_start->num_entities) + "x" +
                      std::to_string(warm_start->dim) + ", " +
                      std::to_string(warm_start->num_relations) + " relations) does not match (" +
                      std::to_string(num_entities) + "x" + std::to_string(n) + ", " +
                      std::to_string(num_relations) + " relations)");
    }
    p.entity = warm_start->entity;
    p.relation = warm_start->relation;
  } else {
    const double bound = 6.0 / std::sqrt(static_cast<double>(n));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (double& x : p.entity) x = uni(rng);
    for (double& x : p.relation) x = uni(rng);
    for (std::size_t r = 0; r < num_relations; ++r) {
      normalize(p.relation_row(static_cast<RelationId>(r)));
    }
  }
  for (std::size_t e = 0; e < num_entities; ++e) normalize(p.entity_row(static_cast<EntityId>(e)));

  p.concepts.assign(m * n * n, 0.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto d = p.concept_matrix(i);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        // Always draw so the stream does not depend on the noise level.
        const double z = noise(rng);
        d[a * n + b] = (a == b ? 1.0 : 0.0) + hp.init_noise_sd * z;
      }
    }
  }

  const double score0 = hp.attention == AttentionMode::kDenseL1 && m > 0 ? 1.0 / m : 0.0;
  p.head_scores.assign(num_relations * m, score0);
  p.tail_scores.assign(num_relations * m, score0);
  p.head_assign.assign(num_relations * m, 0);
  p.tail_assign.assign(num_relations * m, 0);

  if (hp.model == ModelKind::kSTransE) {
    for (std::size_t r = 0; r < num_relations; ++r) {
      p.head_assign[r * m + 2 * r] = 1;
      p.tail_assign[r * m + 2 * r + 1] = 1;
    }
  } else if (hp.model == ModelKind::kITransF) {
    if (hp.attention == AttentionMode::kSparse) {
      const auto k = static_cast<std::size_t>(hp.max_active);
      std::vector<std::size_t> idx(m);
      for (auto side : {Side::kHead, Side::kTail}) {
        for (std::size_t r = 0; r < num_relations; ++r) {
          std::iota(idx.begin(), idx.end(), 0);
          // Partial Fisher-Yates: the first k slots become a uniform k-subset.
          for (std::size_t j = 0; j < k; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, m - 1);
            std::swap(idx[j], idx[pick(rng)]);
          }
          auto bits = p.assignment(side, static_cast<RelationId>(r));
          for (std::size_t j = 0; j < k; ++j) bits[idx[j]] = 1;
        }
      }
    } else {
      std::fill(p.head_assign.begin(), p.head_assign.end(), 1);
      std::fill(p.tail_assign.begin(), p.tail_assign.end(), 1);
    }
  }
  return p;
}

void sparse_softmax(std::span<const double> scores, std::span<const std::uint8_t> active,
                    double tau, std::span<double> out) {
  if (!(tau > 0)) throw ArgumentError("softmax temperature must be > 0");
  const std::size_t m = scores.size();
  double vmax = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (active[i]) {
      vmax = std::max(vmax, scores[i]);
      any = true;
    }
  }
  if (!any) throw DomainError("sparse_softmax: assignment vector has no active entry");
  double z = 0;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = active[i] ? std::exp((scores[i] - vmax) / tau) : 0.0;
    z += out[i];
  }
  for (std::size_t i = 0; i < m; ++i) out[i] /= z;
}

std::vector<double> sparse_softmax(std::span<const double> scores,
                                   std::span<const std::uint8_t> active, double tau) {
  std::vector<double> out(scores.size());
  sparse_softmax(scores, active, tau, out);
  return out;
}

void attention(const ModelParams& p, const Hyperparams& hp, Side side, RelationId r,
               std::span<double> out) {
  if (hp.model == ModelKind::kTransE) throw ArgumentError("TransE has no attention");
  auto v = p.scores(side, r);
  if (hp.model == ModelKind::kITransF && hp.attention == AttentionMode::kDenseL1) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i], 0.0);
    return;
  }
  sparse_softmax(v, p.assignment(side, r), hp.temperature, out);
}

void matvec(std::span<const double> matrix, std::span<const double> e, std::span<double> out) {
  const std::size_t n = e.size();
  for (std::size_t a = 0; a < n; ++a) {
    const double* row = matrix.data() + a * n;
    double s = 0;
    for (std::size_t b = 0; b < n; ++b) s += row[b] * e[b];
    out[a] = s;
  }
}

void project(std::span<const double> alpha, std::span<const double> concepts, std::size_t dim,
             std::span<const double> e, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t nn = dim * dim;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double w = alpha[i];
    if (w == 0.0) continue;
    const double* d = concepts.data() + i * nn;
    for (std::size_t a = 0; a < dim; ++a) {
      const double* row = d + a * dim;
      double s = 0;
      for (std::size_t b = 0; b < dim; ++b) s += row[b] * e[b];
      out[a] += w * s;
    }
  }
}

double vector_norm(std::span<const double> u, int ell) {
  double s = 0;
  if (ell == 1) {
    for (double x : u) s += std::abs(x);
    return s;
  }
  for (double x : u) s += x * x;
  return std::sqrt(s);
}

RelationAttention relation_attention(const ModelParams& p, const Hyperparams& hp, RelationId r) {
  RelationAttention att;
  att.head.resize(p.num_concepts);
  att.tail.resize(p.num_concepts);
  attention(p, hp, Side::kHead, r, att.head);
  attention(p, hp, Side::kTail, r, att.tail);
  return att;
}

double energy_transe(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                     const Hyperparams& hp) {
  return residual_norm(p.entity_row(h), p.relation_row(r), p.entity_row(t), hp.norm);
}

double energy_stranse(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp) {
  const std::size_t n = p.dim;
  std::vector<double> ph(n), pt(n);
  matvec(p.concept_matrix(2 * static_cast<std::size_t>(r)), p.entity_row(h), ph);
  matvec(p.concept_matrix(2 * static_cast<std::size_t>(r) + 1), p.entity_row(t), pt);
  return residual_norm(ph, p.relation_row(r), pt, hp.norm);
}

double energy_itransf(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp, const RelationAttention& att) {
  const std::size_t n = p.dim;
  std::vector<double> ph(n), pt(n);
  project(att.head, p.concepts, n, p.entity_row(h), ph);
  project(att.tail, p.concepts, n, p.entity_row(t), pt);
  return residual_norm(ph, p.relation_row(r), pt, hp.norm);
}

double energy_itransf(EntityId h, RelationId r, EntityId t, const ModelParams& p,
                      const Hyperparams& hp) {
  return energy_itransf(h, r, t, p, hp, relation_attention(p, hp, r));
}

double energy(const Triple& x, const ModelParams& p, const Hyperparams& hp) {
  switch (hp.model) {
    case ModelKind::kTransE: return energy_transe(x.h, x.r, x.t, p, hp);
    case ModelKind::kSTransE: return energy_stranse(x.h, x.r, x.t, p, hp);
    case ModelKind::kITransF: return energy_itransf(x.h, x.r, x.t, p, hp);
  }
  return 0;
}

double single_matrix_energy(Side side, std::size_t concept_id, EntityId h, RelationId r,
                            EntityId t, const ModelParams& p, const Hyperparams& hp,
                            const RelationAttention& att) {
  const std::size_t n = p.dim;
  std::vector<double> ph(n), pt(n);
  if (side == Side::kHead) {
    matvec(p.concept_matrix(concept_id), p.entity_row(h), ph);
    project(att.tail, p.concepts, n, p.entity_row(t), pt);
  } else {
    project(att.head, p.concepts, n, p.entity_row(h), ph);
    matvec(p.concept_matrix(concept_id), p.entity_row(t), pt);
  }
  return residual_norm(ph, p.relation_row(r), pt, hp.norm);
}

double single_matrix_energy(Side side, std::size_t concept_id, EntityId h, RelationId r,
                            EntityId t, const ModelParams& p, const Hyperparams& hp) {
  if (concept_id >= p.num_concepts) throw ArgumentError("concept index out of range");
  return single_matrix_energy(side, concept_id, h, r, t, p, hp, relation_attention(p, hp, r));
}

AttentionSnapshot attention_snapshot(const ModelParams& p, const Hyperparams& hp) {
  AttentionSnapshot snap;
  snap.num_concepts = p.num_concepts;
  if (hp.model == ModelKind::kTransE) return snap;
  snap.head.resize(p.num_relations);
  snap.tail.resize(p.num_relations);
  for (std::size_t r = 0; r < p.num_relations; ++r) {
    auto att = relation_attention(p, hp, static_cast<RelationId>(r));
    snap.head[r] = std::move(att.head);
    snap.tail[r] = std::move(att.tail);
  }
  return snap;
}

}  // namespace itransf
