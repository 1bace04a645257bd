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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "itransf/kb_data.h"
#include "itransf/model.h"
#include "itransf/sampling.h"

namespace itransf {

// Stateless 64-bit mixer for deriving independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// [γ + pos − neg]₊; NaN propagates so the caller's finiteness check sees it.
inline double hinge_loss(double pos, double neg, double gamma) {
  const double v = gamma + pos - neg;
  return v <= 0 ? 0.0 : v;
}

struct TrainingPair {
  Triple pos;
  Triple neg;
};

// Gradient of the dense partition, same layout as ModelParams. Only rows,
// concept slices and score rows listed in the touched sets are nonzero.
class Gradient {
 public:
  Gradient() = default;
  explicit Gradient(const ModelParams& shape);

  std::span<double> entity(EntityId e);
  std::span<double> relation(RelationId r);
  std::span<double> concept_matrix(std::size_t i);
  std::span<double> scores(Side s, RelationId r);

  const std::vector<EntityId>& touched_entities() const { return touched_entities_; }
  const std::vector<RelationId>& touched_relations() const { return touched_relations_; }
  const std::vector<std::size_t>& touched_concepts() const { return touched_concepts_; }

  // Zeroes touched storage and empties the touched sets.
  void clear();

  // Dense views (zeros where untouched).
  const std::vector<double>& entity_data() const { return entity_; }
  const std::vector<double>& relation_data() const { return relation_; }
  const std::vector<double>& concept_data() const { return concepts_; }
  const std::vector<double>& score_data(Side s) const {
    return s == Side::kHead ? head_scores_ : tail_scores_;
  }

  bool all_finite() const;

 private:
  std::size_t dim_ = 0, num_concepts_ = 0;
  std::vector<double> entity_, relation_, concepts_, head_scores_, tail_scores_;
  std::vector<std::uint8_t> entity_mark_, relation_mark_, concept_mark_;
  std::vector<EntityId> touched_entities_;
  std::vector<RelationId> touched_relations_;
  std::vector<std::size_t> touched_concepts_;
};

// Objective over a batch: Σ hinge + projected-norm penalties + dense_l1
// weight penalty. Pure; used as the finite-difference target.
double batch_loss(const ModelParams& p, const Hyperparams& hp,
                  std::span<const TrainingPair> batch);

// Adds ∂batch_loss/∂θ for the dense partition into grad and returns the loss.
double accumulate_gradient(const ModelParams& p, const Hyperparams& hp,
                           std::span<const TrainingPair> batch, Gradient& grad);

// θ ← θ − lr·g on touched storage, then unit-normalizes touched entity rows
// and clamps dense_l1 weights at zero.
void apply_gradient(ModelParams& p, const Hyperparams& hp, const Gradient& grad, double lr);

struct TrainState {
  TrainState(const TripleStore& store, const Hyperparams& hp, std::uint64_t seed,
             ModelParams params);

  ModelParams params;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::mt19937_64 shuffle_rng;
  NegativeSampler sampler;
  double running_loss = 0;
  Gradient grad;
  std::vector<std::size_t> order;
};

struct EpochStats {
  double mean_loss = 0;  // per training triple
  std::size_t batches = 0;
  double seconds = 0;
};

// One pass over the shuffled training set. Throws NumericError on a
// non-finite loss or gradient, leaving the parameters of earlier batches.
EpochStats sgd_epoch(TrainState& state, const TripleStore& store, const Hyperparams& hp);

// Positive/negative pairs entering the single-matrix cost of (r, side).
// Deterministic in (seed, r, side); a sample of `budget` triples of N_r when
// N_r is larger (kUnlimitedBudget uses all of N_r).
std::vector<TrainingPair> cost_sample(Side side, RelationId r, const TripleStore& store,
                                      const Hyperparams& hp, int budget, std::uint64_t seed);

// Σ over pairs of [γ + f_i(pos) − f_i(neg)]₊ with f_i the single-matrix
// energy of `side`.
double single_matrix_cost(Side side, RelationId r, std::size_t concept_id,
                          std::span<const TrainingPair> pairs, const ModelParams& p,
                          const Hyperparams& hp);
double single_matrix_cost(Side side, RelationId r, std::size_t concept_id,
                          const TripleStore& store, const ModelParams& p, const Hyperparams& hp,
                          int budget, std::uint64_t seed);

// Indices of the k smallest costs, ties to the lower index, ascending.
std::vector<std::size_t> bottom_k(std::span<const double> costs, std::size_t k);

struct BlockUpdateResult {
  // costs[side][r][i]
  std::vector<std::vector<double>> head_costs, tail_costs;
  std::size_t changed_bits = 0;
  std::uint64_t seed = 0;  // seed handed to cost_sample
};

// Reassigns every relation's head and tail supports to the bottom-k
// single-matrix costs. Both sides are scored against the pre-update
// attention before either is written.
BlockUpdateResult block_update(ModelParams& p, const TripleStore& store, const Hyperparams& hp,
                               std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0;
  double seconds = 0;
  bool block_updated = false;
  std::size_t changed_bits = 0;
  std::optional<double> valid_hits10;
  std::optional<double> valid_mean_rank;
};

struct ValidationResult {
  double hits10 = 0;
  double mean_rank = 0;
};

struct TrainOptions {
  const ModelParams* warm_start = nullptr;
  std::ostream* log = nullptr;

  // Validation every eval_every epochs when set; early stop after `patience`
  // epochs without Hits@10 improvement (0 disables).
  std::function<ValidationResult(const ModelParams&)> validate;
  int eval_every = 0;
  int patience = 0;

  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(int epoch, const ModelParams& before, const ModelParams& after,
                     const BlockUpdateResult&)>
      on_block_update;
  int checkpoint_every = 0;
  std::function<void(int epoch, const ModelParams&)> on_checkpoint;
};

struct TrainResult {
  ModelParams params;  // best-by-validation when validation ran, else final
  std::vector<EpochRecord> history;
  int epochs_run = 0;
  int best_epoch = 0;
  bool early_stopped = false;
};

// Alternates block_every epochs of SGD with one block update until
// hp.epochs; block updates stop after hp.effective_block_stop().
TrainResult train(const TripleStore& store, const Hyperparams& hp, std::uint64_t seed,
                  const TrainOptions& options = {});

}  // namespace itransf
