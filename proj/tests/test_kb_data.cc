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
#include <fstream>

#include <gtest/gtest.h>

#include "itransf/errors.h"
#include "itransf/kb_data.h"
#include "test_util.h"

namespace itransf {
namespace {

TEST(Vocab, DenseIdsRoundTrip) {
  Vocab v;
  EXPECT_EQ(v.add_entity("a"), 0);
  EXPECT_EQ(v.add_entity("b"), 1);
  EXPECT_EQ(v.add_entity("a"), 0);
  EXPECT_EQ(v.add_relation("r"), 0);
  for (std::size_t i = 0; i < v.num_entities(); ++i) {
    EXPECT_EQ(*v.find_entity(v.entity_name(static_cast<EntityId>(i))), static_cast<EntityId>(i));
  }
  EXPECT_FALSE(v.find_entity("zzz").has_value());
}

TEST(Vocab, FingerprintDependsOnOrder) {
  Vocab a, b;
  a.add_entity("x");
  a.add_entity("y");
  b.add_entity("y");
  b.add_entity("x");
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  Vocab c;
  c.add_entity("x");
  c.add_entity("y");
  EXPECT_EQ(a.fingerprint(), c.fingerprint());
}

TEST(ParseTriples, TwoLines) {
  Vocab v;
  const auto t = parse_triples("a\tr1\tb\nb\tr1\tc\n", v, VocabPolicy::kExtend);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(v.num_entities(), 3u);
  EXPECT_EQ(v.num_relations(), 1u);
  EXPECT_EQ(t[1], (Triple{1, 0, 2}));
}

TEST(ParseTriples, BlankLinesAndCrlf) {
  Vocab v;
  const auto t = parse_triples("a\tr\tb\r\n\n\nb\tr\ta\r\n", v, VocabPolicy::kExtend);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(v.entity_name(1), "b");
}

TEST(ParseTriples, MalformedLineReportsLine) {
  Vocab v;
  try {
    parse_triples("a\tr\tb\nonly\ttwo\n", v, VocabPolicy::kExtend, "x.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("x.txt:2"), std::string::npos);
  }
  EXPECT_THROW(parse_triples("a\t\tb\n", v, VocabPolicy::kExtend), ParseError);
}

TEST(ParseTriples, FrozenRejectsUnseen) {
  Vocab v;
  parse_triples("a\tr\tb\n", v, VocabPolicy::kExtend);
  EXPECT_NO_THROW(parse_triples("b\tr\ta\n", v, VocabPolicy::kFrozen));
  EXPECT_THROW(parse_triples("a\tr\tc\n", v, VocabPolicy::kFrozen), VocabError);
  EXPECT_THROW(parse_triples("a\tq\tb\n", v, VocabPolicy::kFrozen), VocabError);
}

TEST(ParseTriples, FormatRoundTrip) {
  Vocab v;
  const std::string text = "a\tr\tb\nb\ts\tc\n";
  const auto t = parse_triples(text, v, VocabPolicy::kExtend);
  EXPECT_EQ(format_triples(t, v), text);
}

TEST(LoadTriples, MissingFileIsDataError) {
  Vocab v;
  EXPECT_THROW(load_triples("/nonexistent/train.txt", v), DataError);
}

TEST(LoadDataset, DirectoryLayout) {
  testing::TempDir dir;
  std::ofstream(dir / "train.txt") << "a\tr\tb\nb\tr\tc\n";
  std::ofstream(dir / "valid.txt") << "a\tr\tc\n";
  std::ofstream(dir / "test.txt") << "c\ts\td\n";
  const auto ds = load_dataset_dir(dir.path());
  EXPECT_EQ(ds.vocab.num_entities(), 4u);
  EXPECT_EQ(ds.vocab.num_relations(), 2u);
  EXPECT_EQ(ds.store.train().size(), 2u);
  EXPECT_EQ(ds.store.frequency(1), 0u);  // "s" appears only in test
  EXPECT_TRUE(ds.store.is_known({2, 1, 3}));
}

TEST(TripleStore, DomainsAndCounts) {
  const TripleStore s(3, 1, {{0, 0, 1}, {2, 0, 1}}, {}, {});
  EXPECT_EQ(s.head_domain(0), (std::vector<EntityId>{0, 2}));
  EXPECT_EQ(s.tail_domain(0), (std::vector<EntityId>{1}));
  EXPECT_EQ(s.by_relation(0).size(), 2u);
}

TEST(TripleStore, CardinalityStats) {
  const TripleStore s(3, 1, {{0, 0, 1}, {0, 0, 2}}, {}, {});
  EXPECT_DOUBLE_EQ(s.tails_per_head(0), 2.0);
  EXPECT_DOUBLE_EQ(s.heads_per_tail(0), 1.0);
}

TEST(TripleStore, Invariants) {
  const auto s = testing::random_store(20, 4, 120, 7, 10);
  std::size_t total = 0;
  for (RelationId r = 0; r < 4; ++r) {
    total += s.by_relation(r).size();
    if (!s.by_relation(r).empty()) {
      EXPECT_FALSE(s.head_domain(r).empty());
      EXPECT_FALSE(s.tail_domain(r).empty());
    }
  }
  EXPECT_EQ(total, s.train().size());
  EXPECT_EQ(s.num_known(), s.train().size() + s.valid().size() + s.test().size());
  for (const auto& x : s.test()) EXPECT_TRUE(s.is_known(x));
}

TEST(TripleStore, KnownIndexes) {
  const TripleStore s(4, 1, {{0, 0, 1}, {2, 0, 1}}, {{3, 0, 1}}, {{0, 0, 3}});
  auto heads = s.known_heads(0, 1);
  std::vector<EntityId> h(heads.begin(), heads.end());
  std::sort(h.begin(), h.end());
  EXPECT_EQ(h, (std::vector<EntityId>{0, 2, 3}));
  auto tails = s.known_tails(0, 0);
  std::vector<EntityId> t(tails.begin(), tails.end());
  std::sort(t.begin(), t.end());
  EXPECT_EQ(t, (std::vector<EntityId>{1, 3}));
  EXPECT_TRUE(s.known_heads(0, 2).empty());
}

TEST(TripleStore, RejectsOutOfRangeIds) {
  EXPECT_THROW(TripleStore(2, 1, {{0, 0, 2}}, {}, {}), ArgumentError);
  EXPECT_THROW(TripleStore(2, 1, {{0, 1, 1}}, {}, {}), ArgumentError);
}

TEST(FrequencyBins, ExponentialFrequencies) {
  std::vector<double> f;
  for (int i = 0; i <= 6; ++i) f.push_back(std::exp(static_cast<double>(i)));
  const auto b = bin_frequencies(f, 3);
  ASSERT_EQ(b.num_bins(), 3);
  EXPECT_NEAR(b.boundaries[1], 2.0, 1e-12);
  EXPECT_NEAR(b.boundaries[2], 4.0, 1e-12);
  EXPECT_EQ(b.bin_of_relation, (std::vector<int>{0, 0, 0, 1, 1, 2, 2}));
}

TEST(FrequencyBins, Degenerate) {
  const std::vector<double> one{5.0};
  EXPECT_EQ(bin_frequencies(one, 3).bin_of_relation, (std::vector<int>{0}));
  const std::vector<double> flat{1.0, 1.0, 1.0};
  EXPECT_EQ(bin_frequencies(flat, 3).bin_of_relation, (std::vector<int>{0, 0, 0}));
  EXPECT_THROW(bin_frequencies(one, 0), ArgumentError);
}

TEST(FrequencyBins, AbsentRelationsUnbinned) {
  const TripleStore s(3, 3, {{0, 0, 1}, {1, 0, 2}, {0, 2, 1}}, {}, {{0, 1, 2}});
  const auto b = bin_relations(s, 2);
  EXPECT_EQ(b.bin_of_relation[1], -1);
  EXPECT_EQ(b.bin_of_relation[2], 0);
  EXPECT_EQ(b.bin_of_relation[0], 1);
}

TEST(StatsJson, PerRelationFrequency) {
  Vocab v;
  const auto t = parse_triples("a\tr\tb\nb\tr\tc\n", v, VocabPolicy::kExtend);
  const auto s = build_store(v, t, {}, {});
  const auto j = stats_json(v, s);
  EXPECT_EQ(j["num_train"], 2);
  EXPECT_EQ(j["relations"][0]["name"], "r");
  EXPECT_EQ(j["relations"][0]["frequency"], 2);
  EXPECT_EQ(j["relations"][0]["head_domain_size"], 2);
}

}  // namespace
}  // namespace itransf
