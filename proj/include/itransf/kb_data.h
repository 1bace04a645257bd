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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

namespace itransf {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId h = 0;
  RelationId r = 0;
  EntityId t = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

using TripleList = std::vector<Triple>;

// Bidirectional symbol tables for entities and relations. Ids are dense and
// assigned in first-seen order.
class Vocab {
 public:
  EntityId add_entity(std::string_view name);
  RelationId add_relation(std::string_view name);

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  const std::string& entity_name(EntityId id) const { return entity_names_.at(id); }
  const std::string& relation_name(RelationId id) const { return relation_names_.at(id); }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }

  // FNV-1a over all names in id order; identifies a vocabulary in checkpoints.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
};

enum class VocabPolicy {
  kExtend,  // unseen symbols get fresh ids
  kFrozen,  // unseen symbols raise VocabError
};

// Reads "head<TAB>relation<TAB>tail" lines. Blank lines are skipped; a
// trailing CR is tolerated.
TripleList load_triples(const std::filesystem::path& path, Vocab& vocab,
                        VocabPolicy policy = VocabPolicy::kExtend);
TripleList parse_triples(std::string_view text, Vocab& vocab, VocabPolicy policy,
                         const std::string& source_name = "<memory>");

// Inverse of parse_triples, one line per triple.
std::string format_triples(std::span<const Triple> triples, const Vocab& vocab);

// Immutable indexed view of a dataset. Domains, per-relation triple lists
// and the cardinality statistics come from the training split only; the
// filter set covers all three splits.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(std::size_t num_entities, std::size_t num_relations, TripleList train,
              TripleList valid, TripleList test);

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }

  const TripleList& train() const { return train_; }
  const TripleList& valid() const { return valid_; }
  const TripleList& test() const { return test_; }

  // N_r: training triples with relation r.
  const TripleList& by_relation(RelationId r) const { return by_relation_.at(r); }
  // Sorted distinct heads (tails) observed with r in training.
  const std::vector<EntityId>& head_domain(RelationId r) const { return head_domain_.at(r); }
  const std::vector<EntityId>& tail_domain(RelationId r) const { return tail_domain_.at(r); }

  // Mean distinct tails per head / heads per tail; 0 for relations absent
  // from training.
  double tails_per_head(RelationId r) const { return tph_.at(r); }
  double heads_per_tail(RelationId r) const { return hpt_.at(r); }

  std::size_t frequency(RelationId r) const { return by_relation_.at(r).size(); }

  bool is_known(const Triple& x) const { return all_known_.contains(key(x)); }
  std::size_t num_known() const { return all_known_.size(); }

  // Known heads h' with (h', r, t) in any split, and known tails likewise.
  std::span<const EntityId> known_heads(RelationId r, EntityId t) const;
  std::span<const EntityId> known_tails(EntityId h, RelationId r) const;

 private:
  std::uint64_t key(const Triple& x) const;
  std::uint64_t pair_key(std::uint64_t a, std::uint64_t b) const {
    return (a << 32) | b;
  }

  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  TripleList train_, valid_, test_;
  std::vector<TripleList> by_relation_;
  std::vector<std::vector<EntityId>> head_domain_, tail_domain_;
  std::vector<double> tph_, hpt_;
  std::unordered_set<std::uint64_t> all_known_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> known_heads_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> known_tails_;
};

TripleStore build_store(const Vocab& vocab, TripleList train, TripleList valid,
                        TripleList test);

struct Dataset {
  Vocab vocab;
  TripleStore store;
};

// Loads train/valid/test into one vocabulary built over all three splits.
Dataset load_dataset(const std::filesystem::path& train, const std::filesystem::path& valid,
                     const std::filesystem::path& test);
// Same, using <dir>/train.txt, valid.txt and test.txt.
Dataset load_dataset_dir(const std::filesystem::path& dir);

// Partition of relations into equal-width intervals of log training
// frequency. Values on an inner edge go to the lower bin.
struct FrequencyBins {
  std::vector<int> bin_of_relation;  // -1 for relations absent from training
  std::vector<double> boundaries;    // n_bins + 1 log-frequency edges
  int num_bins() const { return static_cast<int>(boundaries.size()) - 1; }
};

FrequencyBins bin_frequencies(std::span<const double> frequencies, int n_bins = 3);
FrequencyBins bin_relations(const TripleStore& store, int n_bins = 3);

// Vocabulary and per-relation statistics (frequency, domain sizes, tph, hpt).
nlohmann::json stats_json(const Vocab& vocab, const TripleStore& store);

}  // namespace itransf
