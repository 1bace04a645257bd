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
#include "itransf/kb_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "itransf/errors.h"

namespace itransf {

EntityId Vocab::add_entity(std::string_view name) {
  auto [it, inserted] =
      entity_index_.try_emplace(std::string(name), static_cast<EntityId>(entity_names_.size()));
  if (inserted) entity_names_.emplace_back(name);
  return it->second;
}

RelationId Vocab::add_relation(std::string_view name) {
  auto [it, inserted] = relation_index_.try_emplace(
      std::string(name), static_cast<RelationId>(relation_names_.size()));
  if (inserted) relation_names_.emplace_back(name);
  return it->second;
}

std::optional<EntityId> Vocab::find_entity(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocab::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;  // separator that cannot appear in UTF-8
    h *= 1099511628211ULL;
  };
  for (const auto& e : entity_names_) mix(e);
  mix("\x01relations");
  for (const auto& r : relation_names_) mix(r);
  return h;
}

TripleList parse_triples(std::string_view text, Vocab& vocab, VocabPolicy policy,
                         const std::string& source_name) {
  TripleList out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    std::string_view fields[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      std::string_view f = line.substr(start, tab == std::string_view::npos ? tab : tab - start);
      if (count < 3) fields[count] = f;
      ++count;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (count != 3) {
      throw ParseError(source_name, line_no,
                       "expected 3 tab-separated fields, found " + std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError(source_name, line_no, "empty field");
    }

    Triple x;
    if (policy == VocabPolicy::kExtend) {
      x.h = vocab.add_entity(fields[0]);
      x.r = vocab.add_relation(fields[1]);
      x.t = vocab.add_entity(fields[2]);
    } else {
      auto h = vocab.find_entity(fields[0]);
      auto r = vocab.find_relation(fields[1]);
      auto t = vocab.find_entity(fields[2]);
      if (!h || !t) {
        throw VocabError(source_name + ":" + std::to_string(line_no) + ": unknown entity '" +
                         std::string(!h ? fields[0] : fields[2]) + "'");
      }
      if (!r) {
        throw VocabError(source_name + ":" + std::to_string(line_no) + ": unknown relation '" +
                         std::string(fields[1]) + "'");
      }
      x = {*h, *r, *t};
    }
    out.push_back(x);
    if (end == text.size()) break;
  }
  return out;
}

TripleList load_triples(const std::filesystem::path& path, Vocab& vocab, VocabPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open triple file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_triples(buf.str(), vocab, policy, path.string());
}

std::string format_triples(std::span<const Triple> triples, const Vocab& vocab) {
  std::string out;
  for (const auto& x : triples) {
    out += vocab.entity_name(x.h);
    out += '\t';
    out += vocab.relation_name(x.r);
    out += '\t';
    out += vocab.entity_name(x.t);
    out += '\n';
  }
  return out;
}

TripleStore::TripleStore(std::size_t num_entities, std::size_t num_relations, TripleList train,
                         TripleList valid, TripleList test)
    : num_entities_(num_entities),
      num_relations_(num_relations),
      train_(std::move(train)),
      valid_(std::move(valid)),
      test_(std::move(test)),
      by_relation_(num_relations),
      head_domain_(num_relations),
      tail_domain_(num_relations),
      tph_(num_relations, 0.0),
      hpt_(num_relations, 0.0) {
  auto check = [&](const Triple& x) {
    if (x.h < 0 || x.t < 0 || static_cast<std::size_t>(x.h) >= num_entities_ ||
        static_cast<std::size_t>(x.t) >= num_entities_ || x.r < 0 ||
        static_cast<std::size_t>(x.r) >= num_relations_) {
      throw ArgumentError("triple id out of range");
    }
  };

  for (const auto& x : train_) {
    check(x);
    by_relation_[x.r].push_back(x);
    head_domain_[x.r].push_back(x.h);
    tail_domain_[x.r].push_back(x.t);
  }
  for (std::size_t r = 0; r < num_relations_; ++r) {
    auto& hd = head_domain_[r];
    auto& td = tail_domain_[r];
    std::sort(hd.begin(), hd.end());
    hd.erase(std::unique(hd.begin(), hd.end()), hd.end());
    std::sort(td.begin(), td.end());
    td.erase(std::unique(td.begin(), td.end()), td.end());
    const double n = static_cast<double>(by_relation_[r].size());
    if (!hd.empty()) tph_[r] = n / static_cast<double>(hd.size());
    if (!td.empty()) hpt_[r] = n / static_cast<double>(td.size());
  }

  for (const auto* split : {&train_, &valid_, &test_}) {
    for (const auto& x : *split) {
      check(x);
      if (all_known_.insert(key(x)).second) {
        known_heads_[pair_key(x.r, x.t)].push_back(x.h);
        known_tails_[pair_key(x.h, x.r)].push_back(x.t);
      }
    }
  }
}

std::uint64_t TripleStore::key(const Triple& x) const {
  return (static_cast<std::uint64_t>(x.h) * num_relations_ + static_cast<std::uint64_t>(x.r)) *
             num_entities_ +
         static_cast<std::uint64_t>(x.t);
}

std::span<const EntityId> TripleStore::known_heads(RelationId r, EntityId t) const {
  auto it = known_heads_.find(pair_key(r, t));
  if (it == known_heads_.end()) return {};
  return it->second;
}

std::span<const EntityId> TripleStore::known_tails(EntityId h, RelationId r) const {
  auto it = known_tails_.find(pair_key(h, r));
  if (it == known_tails_.end()) return {};
  return it->second;
}

TripleStore build_store(const Vocab& vocab, TripleList train, TripleList valid,
                        TripleList test) {
  return TripleStore(vocab.num_entities(), vocab.num_relations(), std::move(train),
                     std::move(valid), std::move(test));
}

Dataset load_dataset(const std::filesystem::path& train, const std::filesystem::path& valid,
                     const std::filesystem::path& test) {
  Dataset ds;
  auto tr = load_triples(train, ds.vocab);
  auto va = load_triples(valid, ds.vocab);
  auto te = load_triples(test, ds.vocab);
  ds.store = build_store(ds.vocab, std::move(tr), std::move(va), std::move(te));
  return ds;
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
  return load_dataset(dir / "train.txt", dir / "valid.txt", dir / "test.txt");
}

FrequencyBins bin_frequencies(std::span<const double> frequencies, int n_bins) {
  if (n_bins < 1) throw ArgumentError("n_bins must be >= 1");
  FrequencyBins bins;
  bins.bin_of_relation.assign(frequencies.size(), -1);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double f : frequencies) {
    if (f <= 0) continue;
    lo = std::min(lo, std::log(f));
    hi = std::max(hi, std::log(f));
  }
  if (lo > hi) {  // nothing observed
    lo = hi = 0.0;
  }
  const double width = hi - lo;
  bins.boundaries.resize(n_bins + 1);
  for (int b = 0; b <= n_bins; ++b) {
    bins.boundaries[b] = lo + width * static_cast<double>(b) / n_bins;
  }
  bins.boundaries[n_bins] = hi;

  // Relative slack so values that are mathematically on an edge (log(e^2))
  // but off by an ulp still fall to the lower bin.
  const double slack = 1e-12 * std::max(1.0, std::abs(hi) + std::abs(lo));
  for (std::size_t r = 0; r < frequencies.size(); ++r) {
    if (frequencies[r] <= 0) continue;
    const double lf = std::log(frequencies[r]);
    int b = 0;
    while (b < n_bins - 1 && lf > bins.boundaries[b + 1] + slack) ++b;
    bins.bin_of_relation[r] = b;
  }
  return bins;
}

FrequencyBins bin_relations(const TripleStore& store, int n_bins) {
  std::vector<double> freq(store.num_relations());
  for (std::size_t r = 0; r < freq.size(); ++r) {
    freq[r] = static_cast<double>(store.frequency(static_cast<RelationId>(r)));
  }
  return bin_frequencies(freq, n_bins);
}

nlohmann::json stats_json(const Vocab& vocab, const TripleStore& store) {
  nlohmann::json j;
  j["num_entities"] = store.num_entities();
  j["num_relations"] = store.num_relations();
  j["num_train"] = store.train().size();
  j["num_valid"] = store.valid().size();
  j["num_test"] = store.test().size();
  j["entities"] = vocab.entity_names();
  auto& rels = j["relations"] = nlohmann::json::array();
  for (std::size_t i = 0; i < store.num_relations(); ++i) {
    const auto r = static_cast<RelationId>(i);
    rels.push_back({{"id", r},
                    {"name", vocab.relation_name(r)},
                    {"frequency", store.frequency(r)},
                    {"head_domain_size", store.head_domain(r).size()},
                    {"tail_domain_size", store.tail_domain(r).size()},
                    {"tph", store.tails_per_head(r)},
                    {"hpt", store.heads_per_tail(r)}});
  }
  return j;
}

}  // namespace itransf
