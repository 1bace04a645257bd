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
#include "itransf/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace itransf {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kHead: return "head";
    case Direction::kTail: return "tail";
    case Direction::kBoth: return "both";
  }
  return "?";
}

RelationProjections::RelationProjections(const ModelParams& p, const Hyperparams& hp,
                                         RelationId r)
    : p_(&p), norm_(hp.norm), r_(r) {
  const std::size_t n = p.dim;
  const std::size_t E = p.num_entities;
  head_proj_.resize(E * n);
  tail_proj_.resize(E * n);
  switch (hp.model) {
    case ModelKind::kTransE:
      std::copy(p.entity.begin(), p.entity.end(), head_proj_.begin());
      std::copy(p.entity.begin(), p.entity.end(), tail_proj_.begin());
      break;
    case ModelKind::kSTransE: {
      auto dh = p.concept_matrix(2 * static_cast<std::size_t>(r));
      auto dt = p.concept_matrix(2 * static_cast<std::size_t>(r) + 1);
      for (std::size_t e = 0; e < E; ++e) {
        auto row = p.entity_row(static_cast<EntityId>(e));
        matvec(dh, row, {head_proj_.data() + e * n, n});
        matvec(dt, row, {tail_proj_.data() + e * n, n});
      }
      break;
    }
    case ModelKind::kITransF: {
      const auto att = relation_attention(p, hp, r);
      for (std::size_t e = 0; e < E; ++e) {
        auto row = p.entity_row(static_cast<EntityId>(e));
        project(att.head, p.concepts, n, row, {head_proj_.data() + e * n, n});
        project(att.tail, p.concepts, n, row, {tail_proj_.data() + e * n, n});
      }
      break;
    }
  }
}

void RelationProjections::candidate_energies(const Triple& x, Side side,
                                             std::span<double> out) const {
  const std::size_t n = p_->dim;
  auto rv = p_->relation_row(r_);
  const std::size_t E = p_->num_entities;
  if (side == Side::kHead) {
    std::span<const double> tail(tail_proj_.data() + x.t * n, n);
    for (std::size_t c = 0; c < E; ++c) {
      out[c] = residual_norm({head_proj_.data() + c * n, n}, rv, tail, norm_);
    }
  } else {
    std::span<const double> head(head_proj_.data() + x.h * n, n);
    for (std::size_t c = 0; c < E; ++c) {
      out[c] = residual_norm(head, rv, {tail_proj_.data() + c * n, n}, norm_);
    }
  }
}

std::int64_t rank_from_energies(std::span<const double> energies, EntityId truth,
                                std::span<const EntityId> known_others) {
  const double target = energies[truth];
  auto beats = [&](EntityId c) {
    return energies[c] < target || (energies[c] == target && c < truth);
  };
  std::int64_t better = 0;
  for (std::size_t c = 0; c < energies.size(); ++c) {
    if (beats(static_cast<EntityId>(c))) ++better;
  }
  for (EntityId c : known_others) {
    if (c != truth && beats(c)) --better;
  }
  return better + 1;
}

namespace {

std::span<const EntityId> known_for(const Triple& x, Side side, const TripleStore& store,
                                    bool filtered) {
  if (!filtered) return {};
  return side == Side::kHead ? store.known_heads(x.r, x.t) : store.known_tails(x.h, x.r);
}

}  // namespace

std::int64_t rank_query(const Triple& x, Side side, const ModelParams& p,
                        const TripleStore& store, const Hyperparams& hp, bool filtered) {
  RelationProjections proj(p, hp, x.r);
  std::vector<double> energies(p.num_entities);
  proj.candidate_energies(x, side, energies);
  return rank_from_energies(energies, side == Side::kHead ? x.h : x.t,
                            known_for(x, side, store, filtered));
}

EvalReport evaluate(std::span<const Triple> split, const ModelParams& p, const TripleStore& store,
                    const Hyperparams& hp, const EvalOptions& options) {
  EvalReport report;
  report.direction = options.direction;
  report.filtered = options.filtered;
  report.per_relation.resize(p.num_relations);

  std::vector<std::size_t> chosen(split.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  if (options.max_triples > 0 && options.max_triples < chosen.size()) {
    std::mt19937_64 rng(options.subsample_seed);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(options.max_triples);
    std::sort(chosen.begin(), chosen.end());
  }

  struct Query {
    std::size_t slot;  // index into report.ranks
    Triple x;
    Side side;
  };
  std::vector<std::vector<Query>> by_relation(p.num_relations);
  std::size_t slots = 0;
  for (std::size_t j : chosen) {
    const Triple& x = split[j];
    if (options.direction != Direction::kTail) by_relation[x.r].push_back({slots++, x, Side::kHead});
    if (options.direction != Direction::kHead) by_relation[x.r].push_back({slots++, x, Side::kTail});
  }
  report.ranks.assign(slots, 0);
  report.num_queries = slots;

  const unsigned threads = std::max(1u, options.threads);
  for (std::size_t ri = 0; ri < p.num_relations; ++ri) {
    const auto& queries = by_relation[ri];
    if (queries.empty()) continue;
    const RelationProjections proj(p, hp, static_cast<RelationId>(ri));
    auto work = [&](std::size_t begin, std::size_t end) {
      std::vector<double> energies(p.num_entities);
      for (std::size_t q = begin; q < end; ++q) {
        const auto& query = queries[q];
        proj.candidate_energies(query.x, query.side, energies);
        report.ranks[query.slot] =
            rank_from_energies(energies, query.side == Side::kHead ? query.x.h : query.x.t,
                               known_for(query.x, query.side, store, options.filtered));
      }
    };
    const std::size_t nthreads = std::min<std::size_t>(threads, queries.size());
    if (nthreads <= 1) {
      work(0, queries.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (queries.size() + nthreads - 1) / nthreads;
      for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(queries.size(), b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
      }
      for (auto& th : pool) th.join();
    }
    auto& m = report.per_relation[ri];
    std::int64_t rank_sum = 0;
    std::size_t hits = 0;
    for (const auto& query : queries) {
      rank_sum += report.ranks[query.slot];
      hits += report.ranks[query.slot] <= 10 ? 1 : 0;
    }
    m.count = queries.size();
    m.mean_rank = static_cast<double>(rank_sum) / static_cast<double>(m.count);
    m.hits_at_10 = 100.0 * static_cast<double>(hits) / static_cast<double>(m.count);
  }

  std::int64_t rank_sum = 0;
  std::size_t hits = 0;
  for (auto r : report.ranks) {
    rank_sum += r;
    hits += r <= 10 ? 1 : 0;
  }
  if (slots > 0) {
    report.mean_rank = static_cast<double>(rank_sum) / static_cast<double>(slots);
    report.hits_at_10 = 100.0 * static_cast<double>(hits) / static_cast<double>(slots);
  }

  if (options.bins != nullptr) {
    const int nb = options.bins->num_bins();
    std::vector<double> sum(nb, 0.0);
    report.per_bin_relations.assign(nb, 0);
    for (std::size_t ri = 0; ri < p.num_relations; ++ri) {
      if (report.per_relation[ri].count == 0 || ri >= options.bins->bin_of_relation.size()) {
        continue;
      }
      const int b = options.bins->bin_of_relation[ri];
      if (b < 0) continue;
      sum[b] += report.per_relation[ri].hits_at_10;
      ++report.per_bin_relations[b];
    }
    report.per_bin.resize(nb);
    for (int b = 0; b < nb; ++b) {
      report.per_bin[b] = report.per_bin_relations[b] > 0
                              ? sum[b] / static_cast<double>(report.per_bin_relations[b])
                              : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report, const Vocab* vocab) {
  nlohmann::json j;
  j["mean_rank"] = report.mean_rank;
  j["hits_at_10"] = report.hits_at_10;
  j["num_queries"] = report.num_queries;
  j["direction"] = to_string(report.direction);
  j["filtered"] = report.filtered;
  auto& rels = j["per_relation"] = nlohmann::json::array();
  for (std::size_t r = 0; r < report.per_relation.size(); ++r) {
    const auto& m = report.per_relation[r];
    if (m.count == 0) continue;
    nlohmann::json e = {{"id", r},
                        {"mean_rank", m.mean_rank},
                        {"hits_at_10", m.hits_at_10},
                        {"count", m.count}};
    if (vocab != nullptr) e["name"] = vocab->relation_name(static_cast<RelationId>(r));
    rels.push_back(std::move(e));
  }
  if (!report.per_bin.empty()) {
    auto& bins = j["per_bin"] = nlohmann::json::array();
    for (std::size_t b = 0; b < report.per_bin.size(); ++b) {
      bins.push_back({{"bin", b},
                      {"relation_avg_hits_at_10",
                       std::isnan(report.per_bin[b]) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(report.per_bin[b])},
                      {"relations", report.per_bin_relations[b]}});
    }
  }
  return j;
}

std::string format_report(const EvalReport& report, const Vocab* vocab) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s ranking, direction=%s, queries=%zu\n",
                report.filtered ? "filtered" : "raw", std::string(to_string(report.direction)).c_str(),
                report.num_queries);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-12s %10.2f\n%-12s %10.2f\n", "mean_rank", report.mean_rank,
                "hits@10(%)", report.hits_at_10);
  out << buf;

  std::size_t width = 8;
  for (std::size_t r = 0; r < report.per_relation.size(); ++r) {
    if (report.per_relation[r].count == 0) continue;
    const std::string name =
        vocab ? vocab->relation_name(static_cast<RelationId>(r)) : std::to_string(r);
    width = std::max(width, name.size());
  }
  out << '\n';
  std::snprintf(buf, sizeof(buf), "%-*s %8s %10s %10s\n", static_cast<int>(width), "relation",
                "queries", "mean_rank", "hits@10");
  out << buf;
  for (std::size_t r = 0; r < report.per_relation.size(); ++r) {
    const auto& m = report.per_relation[r];
    if (m.count == 0) continue;
    const std::string name =
        vocab ? vocab->relation_name(static_cast<RelationId>(r)) : std::to_string(r);
    std::snprintf(buf, sizeof(buf), "%-*s %8zu %10.2f %10.2f\n", static_cast<int>(width),
                  name.c_str(), m.count, m.mean_rank, m.hits_at_10);
    out << buf;
  }
  if (!report.per_bin.empty()) {
    out << '\n';
    std::snprintf(buf, sizeof(buf), "%-6s %10s %22s\n", "bin", "relations", "rel-avg hits@10");
    out << buf;
    for (std::size_t b = 0; b < report.per_bin.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%-6zu %10zu %22.2f\n", b, report.per_bin_relations[b],
                    report.per_bin[b]);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace itransf
