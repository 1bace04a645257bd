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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itransf/kb_data.h"
#include "itransf/model.h"
#include "json.hpp"

namespace itransf {

enum class Direction { kHead, kTail, kBoth };

std::string_view to_string(Direction d);

// Rank of the true entity among all |E| substitutions on `side`:
// 1 + #{c : f(c) < f(true), or f(c) == f(true) and c < true}, skipping
// candidates c ≠ true whose triple is known when filtered.
std::int64_t rank_query(const Triple& x, Side side, const ModelParams& p,
                        const TripleStore& store, const Hyperparams& hp, bool filtered = true);

// Precomputes, for one relation, the projections of every entity under the
// head and tail attention. Read-only after construction.
class RelationProjections {
 public:
  RelationProjections(const ModelParams& p, const Hyperparams& hp, RelationId r);

  // Energies of all candidates for one query, written into out (size |E|).
  void candidate_energies(const Triple& x, Side side, std::span<double> out) const;

 private:
  const ModelParams* p_;
  int norm_;
  RelationId r_;
  std::vector<double> head_proj_, tail_proj_;  // |E| × n
};

// Rank from a full energy vector, with the deterministic tie rule.
std::int64_t rank_from_energies(std::span<const double> energies, EntityId truth,
                                std::span<const EntityId> known_others);

struct RelationMetrics {
  double mean_rank = 0;
  double hits_at_10 = 0;  // percent
  std::size_t count = 0;
};

struct EvalReport {
  double mean_rank = 0;
  double hits_at_10 = 0;  // percent
  std::size_t num_queries = 0;
  Direction direction = Direction::kBoth;
  bool filtered = true;
  std::vector<RelationMetrics> per_relation;  // indexed by relation id
  // Relation-averaged Hits@10 per frequency bin (relations with queries only);
  // empty unless bins were supplied. NaN for a bin without evaluated relations.
  std::vector<double> per_bin;
  std::vector<std::size_t> per_bin_relations;
  // Per query rank, in the order queries were issued (head before tail for
  // each triple when direction is both).
  std::vector<std::int64_t> ranks;
};

struct EvalOptions {
  bool filtered = true;
  Direction direction = Direction::kBoth;
  unsigned threads = 1;
  const FrequencyBins* bins = nullptr;
  // Evaluate a seeded random subset of this many triples (0 = all).
  std::size_t max_triples = 0;
  std::uint64_t subsample_seed = 0;
};

EvalReport evaluate(std::span<const Triple> split, const ModelParams& p, const TripleStore& store,
                    const Hyperparams& hp, const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& report, const Vocab* vocab = nullptr);
// Aligned-column human-readable form.
std::string format_report(const EvalReport& report, const Vocab* vocab = nullptr);

}  // namespace itransf
