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
#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "itransf/evaluation.h"
#include "test_util.h"

namespace itransf {
namespace {

// Brute force: sort (energy, id) of all admissible candidates, find truth.
std::int64_t sorted_rank(const Triple& x, Side side, const ModelParams& p,
                         const TripleStore& store, const Hyperparams& hp, bool filtered) {
  std::vector<std::pair<double, EntityId>> cands;
  const EntityId truth = side == Side::kHead ? x.h : x.t;
  for (EntityId c = 0; c < static_cast<EntityId>(p.num_entities); ++c) {
    Triple y = x;
    (side == Side::kHead ? y.h : y.t) = c;
    if (filtered && c != truth && store.is_known(y)) continue;
    cands.emplace_back(energy(y, p, hp), c);
  }
  std::sort(cands.begin(), cands.end());
  const auto it = std::find_if(cands.begin(), cands.end(),
                               [&](const auto& e) { return e.second == truth; });
  return static_cast<std::int64_t>(it - cands.begin()) + 1;
}

// Entities on a line, e_i = i, r = 1: (i, 0, i+1) has a unique zero energy.
struct ChainFixture {
  TripleStore store;
  ModelParams p;
  Hyperparams hp;
  explicit ChainFixture(int n) {
    TripleList train;
    for (int i = 0; i + 1 < n; ++i) train.push_back({i, 0, i + 1});
    store = TripleStore(n, 1, train, {}, {});
    hp.model = ModelKind::kTransE;
    hp.dim = 1;
    p = init_params(n, 1, hp, 1);
    for (int i = 0; i < n; ++i) p.entity[i] = i;
    p.relation[0] = 1;
  }
};

TEST(RankFromEnergies, Examples) {
  const std::vector<double> e{0.1, 0.5, 0.9};
  EXPECT_EQ(rank_from_energies(e, 1, {}), 2);
  EXPECT_EQ(rank_from_energies(e, 0, {}), 1);
  const std::vector<EntityId> known{0};
  EXPECT_EQ(rank_from_energies(e, 1, known), 1);
}

TEST(RankFromEnergies, TiesCountOnlyLowerIds) {
  const std::vector<double> e{0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(rank_from_energies(e, 0, {}), 1);
  EXPECT_EQ(rank_from_energies(e, 2, {}), 3);
  const std::vector<EntityId> known{1, 2};
  EXPECT_EQ(rank_from_energies(e, 2, known), 2);
}

TEST(RankQuery, MatchesSortOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto store = testing::random_store(20, 3, 80, seed, 10);
    Hyperparams hp;
    hp.dim = 4;
    hp.num_concepts = 3;
    hp.max_active = 2;
    hp.init_noise_sd = 0.3;
    hp.norm = 1 + static_cast<int>(seed % 2);
    const auto p = init_params(20, 3, hp, seed);
    for (const auto& x : store.test()) {
      for (Side side : {Side::kHead, Side::kTail}) {
        for (bool filtered : {true, false}) {
          EXPECT_EQ(rank_query(x, side, p, store, hp, filtered),
                    sorted_rank(x, side, p, store, hp, filtered));
        }
      }
    }
  }
}

TEST(Evaluate, MemorizingModelIsPerfect) {
  ChainFixture f(12);
  const auto rep = evaluate(f.store.train(), f.p, f.store, f.hp);
  EXPECT_EQ(rep.hits_at_10, 100.0);
  EXPECT_EQ(rep.mean_rank, 1.0);
  EXPECT_EQ(rep.num_queries, 2 * f.store.train().size());
}

TEST(Evaluate, UntrainedModelRanksNearMiddle) {
  const std::size_t E = 200;
  const auto store = testing::random_store(E, 5, 3000, 3, 500);
  Hyperparams hp;
  hp.dim = 10;
  hp.num_concepts = 4;
  const auto p = init_params(E, 5, hp, 9);
  EvalOptions eo;
  eo.filtered = false;
  eo.max_triples = 500;
  const auto rep = evaluate(store.test(), p, store, hp, eo);
  EXPECT_EQ(rep.num_queries, 1000u);
  EXPECT_NEAR(rep.mean_rank, (E + 1) / 2.0, 0.1 * E / 2.0);
}

TEST(Evaluate, FilteredNeverWorseThanRaw) {
  const auto store = testing::random_store(25, 3, 150, 4, 20);
  Hyperparams hp;
  hp.dim = 5;
  hp.num_concepts = 3;
  const auto p = init_params(25, 3, hp, 2);
  EvalOptions raw;
  raw.filtered = false;
  const auto a = evaluate(store.test(), p, store, hp);
  const auto b = evaluate(store.test(), p, store, hp, raw);
  ASSERT_EQ(a.ranks.size(), b.ranks.size());
  for (std::size_t i = 0; i < a.ranks.size(); ++i) EXPECT_LE(a.ranks[i], b.ranks[i]);
  EXPECT_LE(a.mean_rank, b.mean_rank);
}

TEST(Evaluate, ThreadCountDoesNotChangeRanks) {
  const auto store = testing::random_store(40, 4, 300, 4, 60);
  Hyperparams hp;
  hp.dim = 5;
  hp.num_concepts = 3;
  const auto p = init_params(40, 4, hp, 2);
  EvalOptions one, many;
  many.threads = 7;
  EXPECT_EQ(evaluate(store.test(), p, store, hp, one).ranks,
            evaluate(store.test(), p, store, hp, many).ranks);
}

TEST(Evaluate, DirectionsAndPerRelation) {
  ChainFixture f(6);
  EvalOptions eo;
  eo.direction = Direction::kTail;
  const auto rep = evaluate(f.store.train(), f.p, f.store, f.hp, eo);
  EXPECT_EQ(rep.num_queries, f.store.train().size());
  EXPECT_EQ(rep.per_relation[0].count, f.store.train().size());
  EXPECT_EQ(rep.per_relation[0].hits_at_10, 100.0);
}

TEST(Evaluate, PerBinRelationAverage) {
  // relation 0: 4 triples, relation 1: 1 triple; perfect on 0, rank 3 on 1
  TripleList train{{0, 0, 1}, {1, 0, 2}, {2, 0, 3}, {3, 0, 4}, {0, 1, 2}};
  const TripleStore store(20, 2, train, {}, {});
  Hyperparams hp;
  hp.model = ModelKind::kTransE;
  hp.dim = 1;
  auto p = init_params(20, 2, hp, 1);
  for (int i = 0; i < 20; ++i) p.entity[i] = 100.0 * i;
  p.relation = {100.0, 100.0};  // relation 1 predicts i+1, truth is i+2
  const auto bins = bin_relations(store, 2);
  EvalOptions eo;
  eo.bins = &bins;
  eo.direction = Direction::kTail;
  const auto rep = evaluate(store.train(), p, store, hp, eo);
  ASSERT_EQ(rep.per_bin.size(), 2u);
  EXPECT_EQ(rep.per_bin[1], 100.0);  // frequent relation
  EXPECT_EQ(rep.per_bin[0], 100.0);  // rank 3 is still a hit
  EXPECT_EQ(rep.ranks.back(), 3);
}

TEST(Evaluate, EmptyBinIsNaN) {
  std::vector<double> f{1.0, std::exp(6.0)};
  const auto bins = bin_frequencies(f, 3);
  ChainFixture fx(5);
  EvalOptions eo;
  FrequencyBins b = bins;
  b.bin_of_relation = {0};
  eo.bins = &b;
  const auto rep = evaluate(fx.store.train(), fx.p, fx.store, fx.hp, eo);
  EXPECT_TRUE(std::isnan(rep.per_bin[1]));
  EXPECT_EQ(rep.per_bin_relations[1], 0u);
}

TEST(Report, JsonAndText) {
  ChainFixture f(6);
  const auto rep = evaluate(f.store.train(), f.p, f.store, f.hp);
  const auto j = to_json(rep);
  EXPECT_EQ(j["hits_at_10"], 100.0);
  EXPECT_EQ(j["per_relation"].size(), 1u);
  const auto text = format_report(rep);
  EXPECT_NE(text.find("mean_rank"), std::string::npos);
  EXPECT_NE(text.find("filtered"), std::string::npos);
}

}  // namespace
}  // namespace itransf
