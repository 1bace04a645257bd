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
#include <gtest/gtest.h>

#include "itransf/errors.h"
#include "itransf/sampling.h"

namespace itransf {
namespace {

TEST(DomainProbability, Formula) {
  EXPECT_DOUBLE_EQ(domain_probability(10, 10, 1, 0.001), 0.1);
  EXPECT_DOUBLE_EQ(domain_probability(1000, 1000, 1, 0.001), 0.5);
  EXPECT_DOUBLE_EQ(domain_probability(7, 3, 5, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(domain_probability(4, 5, 40, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(domain_probability(4, 5, 40, 0.5), 0.25);
  EXPECT_THROW(domain_probability(1, 1, 0, 0.1), DomainError);
}

TEST(DomainProbability, FromStore) {
  const TripleStore s(4, 2, {{0, 0, 1}, {2, 0, 1}, {0, 0, 3}}, {}, {{1, 1, 2}});
  // |M^H| = 2, |M^T| = 2, |N| = 3
  EXPECT_DOUBLE_EQ(domain_probability(s, 0, 0.3), 0.3 * 4 / 3);
  EXPECT_THROW(domain_probability(s, 1, 0.3), DomainError);
}

TEST(Bernoulli, HeadProbability) {
  const TripleStore s(3, 1, {{0, 0, 1}, {0, 0, 2}}, {}, {});
  EXPECT_NEAR(bernoulli_head_probability(s, 0), 2.0 / 3.0, 1e-15);
}

TEST(NegativeSampler, ForcedChoiceWithTwoEntities) {
  const TripleStore s(2, 1, {{0, 0, 1}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kUniform, 0, 1);
  for (int i = 0; i < 200; ++i) {
    const auto c = ns.corrupt_detailed({0, 0, 1});
    if (c.side == Side::kHead) {
      EXPECT_EQ(c.triple, (Triple{1, 0, 1}));
    } else {
      EXPECT_EQ(c.triple, (Triple{0, 0, 0}));
    }
  }
}

TEST(NegativeSampler, TooFewEntities) {
  const TripleStore s(1, 1, {{0, 0, 0}}, {}, {});
  EXPECT_THROW(NegativeSampler(s, SamplingMode::kUniform, 0, 1), DomainError);
}

TEST(NegativeSampler, NeverReturnsOriginalEntity) {
  const TripleStore s(5, 2, {{0, 0, 1}, {2, 0, 1}, {3, 1, 4}}, {}, {});
  for (auto mode : {SamplingMode::kUniform, SamplingMode::kBernoulli, SamplingMode::kDomain}) {
    NegativeSampler ns(s, mode, 10.0, 3);
    for (const auto& x : s.train()) {
      for (int i = 0; i < 100; ++i) {
        const auto c = ns.corrupt_detailed(x);
        EXPECT_NE(c.triple, x);
        EXPECT_EQ(c.triple.r, x.r);
        if (c.side == Side::kHead) {
          EXPECT_EQ(c.triple.t, x.t);
        } else {
          EXPECT_EQ(c.triple.h, x.h);
        }
      }
    }
  }
}

TEST(NegativeSampler, BernoulliSideFrequency) {
  const TripleStore s(10, 1, {{0, 0, 1}, {0, 0, 2}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kBernoulli, 0, 12);
  int heads = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) heads += ns.corrupt_detailed({0, 0, 1}).side == Side::kHead;
  EXPECT_NEAR(static_cast<double>(heads) / n, 2.0 / 3.0, 0.01);
}

TEST(NegativeSampler, UniformSideIsFair) {
  const TripleStore s(10, 1, {{0, 0, 1}, {0, 0, 2}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kUniform, 0, 12);
  int heads = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) heads += ns.corrupt_detailed({0, 0, 1}).side == Side::kHead;
  EXPECT_NEAR(static_cast<double>(heads) / n, 0.5, 0.01);
}

TEST(NegativeSampler, DomainDrawsStayInDomain) {
  // head_domain = {0, 2}, tail_domain = {1, 3}; p = min(λ·2·2/2, 0.5) = 0.5
  const TripleStore s(20, 1, {{0, 0, 1}, {2, 0, 3}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kDomain, 1.0, 5);
  EXPECT_DOUBLE_EQ(ns.p(0), 0.5);
  int in_domain = 0, counted = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto c = ns.corrupt_detailed({0, 0, 1});
    if (c.fallback) continue;
    ++counted;
    if (c.in_domain) {
      ++in_domain;
      if (c.side == Side::kHead) {
        EXPECT_EQ(c.triple.h, 2);
      } else {
        EXPECT_EQ(c.triple.t, 3);
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(in_domain) / counted, 0.5, 0.01);
}

TEST(NegativeSampler, LambdaZeroIsUniform) {
  const TripleStore s(20, 1, {{0, 0, 1}, {2, 0, 3}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kDomain, 0.0, 5);
  EXPECT_EQ(ns.p(0), 0.0);
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(ns.corrupt_detailed({0, 0, 1}).in_domain);
}

TEST(NegativeSampler, SingletonDomainFallsBack) {
  const TripleStore s(6, 1, {{0, 0, 1}}, {}, {});
  NegativeSampler ns(s, SamplingMode::kDomain, 1.0, 5);
  int fallbacks = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = ns.corrupt_detailed({0, 0, 1});
    EXPECT_NE(c.triple, (Triple{0, 0, 1}));
    fallbacks += c.fallback;
    EXPECT_FALSE(c.in_domain);
  }
  EXPECT_GT(fallbacks, 300);
}

TEST(NegativeSampler, SeededStreamsRepeat) {
  const TripleStore s(30, 2, {{0, 0, 1}, {2, 0, 3}, {4, 1, 5}}, {}, {});
  NegativeSampler a(s, SamplingMode::kBernoulli, 0, 77), b(s, SamplingMode::kBernoulli, 0, 77);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(a.corrupt({4, 1, 5}), b.corrupt({4, 1, 5}));
}

}  // namespace
}  // namespace itransf
