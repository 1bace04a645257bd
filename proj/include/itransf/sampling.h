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
#include <random>
#include <vector>

#include "itransf/kb_data.h"
#include "itransf/model.h"

namespace itransf {

// p_r = min(λ·|M^T_r|·|M^H_r| / |N_r|, 0.5)
double domain_probability(std::size_t head_domain_size, std::size_t tail_domain_size,
                          std::size_t num_edges, double lambda);
// Throws DomainError when r has no training triples.
double domain_probability(const TripleStore& store, RelationId r, double lambda);

// Probability of replacing the head under the Bernoulli rule,
// tph / (tph + hpt); 0.5 when both are zero.
double bernoulli_head_probability(const TripleStore& store, RelationId r);

struct Corruption {
  Triple triple;
  Side side = Side::kHead;
  bool in_domain = false;  // replacement drawn from the relation's domain set
  bool fallback = false;   // domain draw fired but the domain had no alternative
};

// Seeded negative-triple generator. Owns its generator; one per worker.
class NegativeSampler {
 public:
  NegativeSampler(const TripleStore& store, SamplingMode mode, double lambda,
                  std::uint64_t seed, bool domain_uniform_side = false);

  Triple corrupt(const Triple& x) { return corrupt_detailed(x).triple; }
  Corruption corrupt_detailed(const Triple& x);

  // Per-relation domain probability (0 outside domain mode and for
  // relations absent from training).
  double p(RelationId r) const { return p_.at(r); }
  SamplingMode mode() const { return mode_; }

 private:
  Side choose_side(RelationId r);
  EntityId draw_other(EntityId original);

  const TripleStore* store_;
  SamplingMode mode_;
  bool domain_uniform_side_;
  std::vector<double> p_;
  std::mt19937_64 rng_;
};

}  // namespace itransf
