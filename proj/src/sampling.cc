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
#include "itransf/sampling.h"

#include <algorithm>

#include "itransf/errors.h"

namespace itransf {

double domain_probability(std::size_t head_domain_size, std::size_t tail_domain_size,
                          std::size_t num_edges, double lambda) {
  if (num_edges == 0) throw DomainError("domain_probability: relation has no training triples");
  const double raw = lambda * static_cast<double>(tail_domain_size) *
                     static_cast<double>(head_domain_size) / static_cast<double>(num_edges);
  return std::min(raw, 0.5);
}

double domain_probability(const TripleStore& store, RelationId r, double lambda) {
  return domain_probability(store.head_domain(r).size(), store.tail_domain(r).size(),
                            store.frequency(r), lambda);
}

double bernoulli_head_probability(const TripleStore& store, RelationId r) {
  const double tph = store.tails_per_head(r);
  const double hpt = store.heads_per_tail(r);
  if (tph + hpt <= 0) return 0.5;
  return tph / (tph + hpt);
}

NegativeSampler::NegativeSampler(const TripleStore& store, SamplingMode mode, double lambda,
                                 std::uint64_t seed, bool domain_uniform_side)
    : store_(&store),
      mode_(mode),
      domain_uniform_side_(domain_uniform_side),
      p_(store.num_relations(), 0.0),
      rng_(seed) {
  if (store.num_entities() < 2) throw DomainError("corruption needs at least two entities");
  if (mode_ == SamplingMode::kDomain) {
    for (std::size_t r = 0; r < p_.size(); ++r) {
      const auto rel = static_cast<RelationId>(r);
      if (store.frequency(rel) > 0) p_[r] = domain_probability(store, rel, lambda);
    }
  }
}

Side NegativeSampler::choose_side(RelationId r) {
  double head_prob = 0.5;
  if (mode_ == SamplingMode::kBernoulli ||
      (mode_ == SamplingMode::kDomain && !domain_uniform_side_)) {
    head_prob = bernoulli_head_probability(*store_, r);
  }
  std::bernoulli_distribution coin(head_prob);
  return coin(rng_) ? Side::kHead : Side::kTail;
}

EntityId NegativeSampler::draw_other(EntityId original) {
  std::uniform_int_distribution<EntityId> pick(0,
                                               static_cast<EntityId>(store_->num_entities()) - 1);
  EntityId e;
  do {
    e = pick(rng_);
  } while (e == original);
  return e;
}

Corruption NegativeSampler::corrupt_detailed(const Triple& x) {
  Corruption out;
  out.triple = x;
  out.side = choose_side(x.r);
  EntityId& slot = out.side == Side::kHead ? out.triple.h : out.triple.t;
  const EntityId original = slot;

  if (mode_ == SamplingMode::kDomain && p_[x.r] > 0) {
    std::bernoulli_distribution fire(p_[x.r]);
    if (fire(rng_)) {
      const auto& pool =
          out.side == Side::kHead ? store_->head_domain(x.r) : store_->tail_domain(x.r);
      if (pool.empty() || (pool.size() == 1 && pool[0] == original)) {
        out.fallback = true;
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        EntityId e;
        do {
          e = pool[pick(rng_)];
        } while (e == original);
        slot = e;
        out.in_domain = true;
        return out;
      }
    }
  }
  slot = draw_other(original);
  return out;
}

}  // namespace itransf
