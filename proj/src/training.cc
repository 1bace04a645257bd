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
#include "itransf/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "itransf/errors.h"

namespace itransf {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

// ---------------------------------------------------------------------------
// Gradient buffer

Gradient::Gradient(const ModelParams& shape)
    : dim_(shape.dim),
      num_concepts_(shape.num_concepts),
      entity_(shape.entity.size(), 0.0),
      relation_(shape.relation.size(), 0.0),
      concepts_(shape.concepts.size(), 0.0),
      head_scores_(shape.head_scores.size(), 0.0),
      tail_scores_(shape.tail_scores.size(), 0.0),
      entity_mark_(shape.num_entities, 0),
      relation_mark_(shape.num_relations, 0),
      concept_mark_(shape.num_concepts, 0) {}

std::span<double> Gradient::entity(EntityId e) {
  if (!entity_mark_[e]) {
    entity_mark_[e] = 1;
    touched_entities_.push_back(e);
  }
  return {entity_.data() + e * dim_, dim_};
}

std::span<double> Gradient::relation(RelationId r) {
  if (!relation_mark_[r]) {
    relation_mark_[r] = 1;
    touched_relations_.push_back(r);
  }
  return {relation_.data() + r * dim_, dim_};
}

std::span<double> Gradient::concept_matrix(std::size_t i) {
  if (!concept_mark_[i]) {
    concept_mark_[i] = 1;
    touched_concepts_.push_back(i);
  }
  return {concepts_.data() + i * dim_ * dim_, dim_ * dim_};
}

std::span<double> Gradient::scores(Side s, RelationId r) {
  relation(r);
  auto& v = s == Side::kHead ? head_scores_ : tail_scores_;
  return {v.data() + r * num_concepts_, num_concepts_};
}

void Gradient::clear() {
  for (EntityId e : touched_entities_) {
    std::fill_n(entity_.begin() + e * dim_, dim_, 0.0);
    entity_mark_[e] = 0;
  }
  for (RelationId r : touched_relations_) {
    std::fill_n(relation_.begin() + r * dim_, dim_, 0.0);
    std::fill_n(head_scores_.begin() + r * num_concepts_, num_concepts_, 0.0);
    std::fill_n(tail_scores_.begin() + r * num_concepts_, num_concepts_, 0.0);
    relation_mark_[r] = 0;
  }
  for (std::size_t i : touched_concepts_) {
    std::fill_n(concepts_.begin() + i * dim_ * dim_, dim_ * dim_, 0.0);
    concept_mark_[i] = 0;
  }
  touched_entities_.clear();
  touched_relations_.clear();
  touched_concepts_.clear();
}

bool Gradient::all_finite() const {
  auto finite = [](auto first, std::size_t n) {
    return std::all_of(first, first + n, [](double x) { return std::isfinite(x); });
  };
  for (EntityId e : touched_entities_) {
    if (!finite(entity_.begin() + e * dim_, dim_)) return false;
  }
  for (RelationId r : touched_relations_) {
    if (!finite(relation_.begin() + r * dim_, dim_) ||
        !finite(head_scores_.begin() + r * num_concepts_, num_concepts_) ||
        !finite(tail_scores_.begin() + r * num_concepts_, num_concepts_)) {
      return false;
    }
  }
  for (std::size_t i : touched_concepts_) {
    if (!finite(concepts_.begin() + i * dim_ * dim_, dim_ * dim_)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward/backward for one triple

namespace {

// Projection of one entity under one side's attention, with the per-concept
// products D_i e kept for the backward pass.
struct SideWork {
  std::vector<std::size_t> active;
  std::vector<double> products;  // active.size() × n
  std::vector<double> proj;
  std::vector<double> upstream;  // ∂loss/∂proj
};

struct TripleWork {
  SideWork head, tail;
  std::vector<double> g;  // ∂‖u‖/∂u
  double energy = 0;
};

bool learns_attention(const Hyperparams& hp) { return hp.model == ModelKind::kITransF; }

void forward_side(const ModelParams& p, const Hyperparams& hp, std::span<const double> alpha,
                  EntityId e, SideWork& w) {
  const std::size_t n = p.dim;
  auto ev = p.entity_row(e);
  w.proj.assign(n, 0.0);
  if (hp.model == ModelKind::kTransE) {
    std::copy(ev.begin(), ev.end(), w.proj.begin());
    return;
  }
  // dense_l1 needs D_j e for every concept, including zero-weight ones,
  // because their weights still receive gradient.
  const bool all = hp.attention == AttentionMode::kDenseL1 && learns_attention(hp);
  w.active.clear();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (all || alpha[i] != 0.0) w.active.push_back(i);
  }
  w.products.resize(w.active.size() * n);
  for (std::size_t j = 0; j < w.active.size(); ++j) {
    const std::size_t i = w.active[j];
    double* y = w.products.data() + j * n;
    matvec(p.concept_matrix(i), ev, {y, n});
    const double a = alpha[i];
    if (a == 0.0) continue;
    for (std::size_t k = 0; k < n; ++k) w.proj[k] += a * y[k];
  }
}

void forward_triple(const ModelParams& p, const Hyperparams& hp, const RelationAttention* att,
                    const Triple& x, TripleWork& w) {
  static const std::vector<double> kNone;
  forward_side(p, hp, att ? std::span<const double>(att->head) : kNone, x.h, w.head);
  forward_side(p, hp, att ? std::span<const double>(att->tail) : kNone, x.t, w.tail);
  auto rv = p.relation_row(x.r);
  w.energy = residual_norm(w.head.proj, rv, w.tail.proj, hp.norm);
}

void energy_gradient(const ModelParams& p, const Hyperparams& hp, const Triple& x,
                     TripleWork& w) {
  const std::size_t n = p.dim;
  auto rv = p.relation_row(x.r);
  w.g.resize(n);
  double norm2 = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const double u = w.head.proj[a] + rv[a] - w.tail.proj[a];
    w.g[a] = u;
    norm2 += u * u;
  }
  if (hp.norm == 1) {
    // Subgradient 0 at the kink.
    for (double& v : w.g) v = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
  } else {
    const double nrm = std::sqrt(norm2);
    for (double& v : w.g) v = nrm > 0 ? v / nrm : 0.0;
  }
}

double penalty(const std::vector<double>& proj) {
  double s = 0;
  for (double v : proj) s += v * v;
  return s > 1.0 ? s - 1.0 : 0.0;
}

double l1_weights(const ModelParams& p, RelationId r) {
  double s = 0;
  for (double v : p.scores(Side::kHead, r)) s += std::abs(v);
  for (double v : p.scores(Side::kTail, r)) s += std::abs(v);
  return s;
}

// Propagates w.upstream (∂loss/∂proj) of one side into entity, concept and
// score gradients.
void backward_side(const ModelParams& p, const Hyperparams& hp, std::span<const double> alpha,
                   Side side, RelationId r, EntityId e, SideWork& w, Gradient& grad) {
  const std::size_t n = p.dim;
  auto ge = grad.entity(e);
  if (hp.model == ModelKind::kTransE) {
    for (std::size_t a = 0; a < n; ++a) ge[a] += w.upstream[a];
    return;
  }
  auto ev = p.entity_row(e);
  std::vector<double> a_grad(w.active.size(), 0.0);  // ∂loss/∂α_i
  for (std::size_t j = 0; j < w.active.size(); ++j) {
    const std::size_t i = w.active[j];
    const double alpha_i = alpha[i];
    const double* y = w.products.data() + j * n;
    double dot = 0;
    for (std::size_t a = 0; a < n; ++a) dot += w.upstream[a] * y[a];
    a_grad[j] = dot;
    if (alpha_i == 0.0) continue;
    auto d = p.concept_matrix(i);
    auto gd = grad.concept_matrix(i);
    // ∂/∂e += α_i D_iᵀ z ;  ∂/∂D_i += α_i z eᵀ
    for (std::size_t a = 0; a < n; ++a) {
      const double za = alpha_i * w.upstream[a];
      if (za == 0.0) continue;
      const double* drow = d.data() + a * n;
      double* gdrow = gd.data() + a * n;
      for (std::size_t b = 0; b < n; ++b) {
        ge[b] += za * drow[b];
        gdrow[b] += za * ev[b];
      }
    }
  }
  if (!learns_attention(hp)) return;

  auto gv = grad.scores(side, r);
  if (hp.attention == AttentionMode::kDenseL1) {
    for (std::size_t j = 0; j < w.active.size(); ++j) gv[w.active[j]] += a_grad[j];
    return;
  }
  // Softmax with temperature: ∂α_i/∂v_j = α_i (δ_ij − α_j) / τ.
  double mean = 0;
  for (std::size_t j = 0; j < w.active.size(); ++j) mean += alpha[w.active[j]] * a_grad[j];
  for (std::size_t j = 0; j < w.active.size(); ++j) {
    const std::size_t i = w.active[j];
    gv[i] += alpha[i] * (a_grad[j] - mean) / hp.temperature;
  }
}

// Loss contribution of one triple's projected-norm penalty plus, when grad
// is given, its hinge coefficient `coef` times ∂f, all backpropagated.
void backward_triple(const ModelParams& p, const Hyperparams& hp, const RelationAttention* att,
                     const Triple& x, double coef, TripleWork& w, Gradient& grad) {
  const std::size_t n = p.dim;
  const bool pen = hp.uses_projection() && hp.proj_penalty > 0;
  w.head.upstream.assign(n, 0.0);
  w.tail.upstream.assign(n, 0.0);
  bool any = false;
  if (coef != 0.0) {
    energy_gradient(p, hp, x, w);
    auto gr = grad.relation(x.r);
    for (std::size_t a = 0; a < n; ++a) {
      w.head.upstream[a] += coef * w.g[a];
      w.tail.upstream[a] -= coef * w.g[a];
      gr[a] += coef * w.g[a];
    }
    any = true;
  }
  if (pen) {
    for (SideWork* s : {&w.head, &w.tail}) {
      if (penalty(s->proj) > 0) {
        for (std::size_t a = 0; a < n; ++a) s->upstream[a] += 2.0 * hp.proj_penalty * s->proj[a];
        any = true;
      }
    }
  }
  if (!any) return;
  static const std::vector<double> kNone;
  backward_side(p, hp, att ? std::span<const double>(att->head) : kNone, Side::kHead, x.r, x.h,
                w.head, grad);
  backward_side(p, hp, att ? std::span<const double>(att->tail) : kNone, Side::kTail, x.r, x.t,
                w.tail, grad);
}

double pair_objective(const ModelParams& p, const Hyperparams& hp, const TrainingPair& pair,
                      TripleWork& pos, TripleWork& neg, Gradient* grad) {
  std::optional<RelationAttention> att;
  if (hp.uses_projection()) att = relation_attention(p, hp, pair.pos.r);
  const RelationAttention* ap = att ? &*att : nullptr;

  forward_triple(p, hp, ap, pair.pos, pos);
  forward_triple(p, hp, ap, pair.neg, neg);
  const double hinge = hinge_loss(pos.energy, neg.energy, hp.margin);
  double loss = hinge;
  if (hp.uses_projection() && hp.proj_penalty > 0) {
    loss += hp.proj_penalty * (penalty(pos.head.proj) + penalty(pos.tail.proj) +
                               penalty(neg.head.proj) + penalty(neg.tail.proj));
  }
  const bool l1 = learns_attention(hp) && hp.attention == AttentionMode::kDenseL1;
  if (l1) loss += hp.l1_coef * l1_weights(p, pair.pos.r);

  if (grad != nullptr) {
    const double c = hinge > 0 ? 1.0 : 0.0;
    backward_triple(p, hp, ap, pair.pos, c, pos, *grad);
    backward_triple(p, hp, ap, pair.neg, -c, neg, *grad);
    if (l1 && hp.l1_coef > 0) {
      for (Side s : {Side::kHead, Side::kTail}) {
        auto v = p.scores(s, pair.pos.r);
        auto gv = grad->scores(s, pair.pos.r);
        for (std::size_t i = 0; i < v.size(); ++i) {
          gv[i] += hp.l1_coef * (v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0));
        }
      }
    }
  }
  return loss;
}

}  // namespace

double batch_loss(const ModelParams& p, const Hyperparams& hp,
                  std::span<const TrainingPair> batch) {
  TripleWork pos, neg;
  double total = 0;
  for (const auto& pair : batch) total += pair_objective(p, hp, pair, pos, neg, nullptr);
  return total;
}

double accumulate_gradient(const ModelParams& p, const Hyperparams& hp,
                           std::span<const TrainingPair> batch, Gradient& grad) {
  TripleWork pos, neg;
  double total = 0;
  for (const auto& pair : batch) total += pair_objective(p, hp, pair, pos, neg, &grad);
  return total;
}

void apply_gradient(ModelParams& p, const Hyperparams& hp, const Gradient& grad, double lr) {
  const std::size_t n = p.dim;
  const std::size_t m = p.num_concepts;
  for (EntityId e : grad.touched_entities()) {
    auto row = p.entity_row(e);
    const double* g = grad.entity_data().data() + e * n;
    for (std::size_t a = 0; a < n; ++a) row[a] -= lr * g[a];
  }
  for (RelationId r : grad.touched_relations()) {
    auto row = p.relation_row(r);
    const double* g = grad.relation_data().data() + r * n;
    for (std::size_t a = 0; a < n; ++a) row[a] -= lr * g[a];
    if (learns_attention(hp)) {
      for (Side s : {Side::kHead, Side::kTail}) {
        auto v = p.scores(s, r);
        const double* gv = grad.score_data(s).data() + r * m;
        for (std::size_t i = 0; i < m; ++i) {
          v[i] -= lr * gv[i];
          if (hp.attention == AttentionMode::kDenseL1 && v[i] < 0) v[i] = 0.0;
        }
      }
    }
  }
  for (std::size_t i : grad.touched_concepts()) {
    auto d = p.concept_matrix(i);
    const double* g = grad.concept_data().data() + i * n * n;
    for (std::size_t a = 0; a < n * n; ++a) d[a] -= lr * g[a];
  }
  for (EntityId e : grad.touched_entities()) {
    auto row = p.entity_row(e);
    double s = 0;
    for (double v : row) s += v * v;
    s = std::sqrt(s);
    if (s > 0) {
      for (double& v : row) v /= s;
    }
  }
}

// ---------------------------------------------------------------------------
// SGD epoch

TrainState::TrainState(const TripleStore& store, const Hyperparams& hp, std::uint64_t seed_in,
                       ModelParams params_in)
    : params(std::move(params_in)),
      seed(seed_in),
      shuffle_rng(mix_seed(seed_in, 2)),
      sampler(store, hp.sampling, hp.domain_lambda, mix_seed(seed_in, 1),
              hp.domain_uniform_side),
      grad(params),
      order(store.train().size()) {
  std::iota(order.begin(), order.end(), 0);
}

EpochStats sgd_epoch(TrainState& state, const TripleStore& store, const Hyperparams& hp) {
  const auto start = std::chrono::steady_clock::now();
  const auto& train = store.train();
  std::shuffle(state.order.begin(), state.order.end(), state.shuffle_rng);

  EpochStats stats;
  double total = 0;
  std::vector<TrainingPair> batch;
  batch.reserve(hp.batch_size);
  const std::size_t bs = static_cast<std::size_t>(hp.batch_size);
  for (std::size_t begin = 0; begin < train.size(); begin += bs) {
    const std::size_t end = std::min(train.size(), begin + bs);
    batch.clear();
    for (std::size_t j = begin; j < end; ++j) {
      const Triple& x = train[state.order[j]];
      batch.push_back({x, state.sampler.corrupt(x)});
    }
    state.grad.clear();
    const double loss = accumulate_gradient(state.params, hp, batch, state.grad);
    if (!std::isfinite(loss) || !state.grad.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite " << (std::isfinite(loss) ? "gradient" : "loss") << " at epoch "
          << state.epoch + 1 << ", batch " << stats.batches << " (loss=" << loss
          << ", first triple " << batch.front().pos.h << " " << batch.front().pos.r << " "
          << batch.front().pos.t << ")";
      throw NumericError(msg.str());
    }
    apply_gradient(state.params, hp, state.grad, hp.lr);
    total += loss;
    ++stats.batches;
  }
  ++state.epoch;
  stats.mean_loss = train.empty() ? 0.0 : total / static_cast<double>(train.size());
  state.running_loss = stats.mean_loss;
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

// ---------------------------------------------------------------------------
// Block update

std::vector<TrainingPair> cost_sample(Side side, RelationId r, const TripleStore& store,
                                      const Hyperparams& hp, int budget, std::uint64_t seed) {
  const auto& triples = store.by_relation(r);
  const std::uint64_t side_tag = side == Side::kHead ? 1 : 2;
  std::vector<std::size_t> idx(triples.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (budget != kUnlimitedBudget && idx.size() > static_cast<std::size_t>(budget)) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r), side_tag));
    for (std::size_t j = 0; j < static_cast<std::size_t>(budget); ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, idx.size() - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    idx.resize(budget);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(idx.size());
  if (idx.empty()) return pairs;
  NegativeSampler sampler(store, hp.sampling, hp.domain_lambda,
                          mix_seed(seed, static_cast<std::uint64_t>(r), side_tag + 16),
                          hp.domain_uniform_side);
  for (std::size_t j : idx) pairs.push_back({triples[j], sampler.corrupt(triples[j])});
  return pairs;
}

double single_matrix_cost(Side side, RelationId r, std::size_t concept_id,
                          std::span<const TrainingPair> pairs, const ModelParams& p,
                          const Hyperparams& hp) {
  if (concept_id >= p.num_concepts) throw ArgumentError("concept index out of range");
  if (pairs.empty()) return 0.0;
  const auto att = relation_attention(p, hp, r);
  double total = 0;
  for (const auto& pr : pairs) {
    const double fp = single_matrix_energy(side, concept_id, pr.pos.h, r, pr.pos.t, p, hp, att);
    const double fn = single_matrix_energy(side, concept_id, pr.neg.h, r, pr.neg.t, p, hp, att);
    total += hinge_loss(fp, fn, hp.margin);
  }
  return total;
}

double single_matrix_cost(Side side, RelationId r, std::size_t concept_id,
                          const TripleStore& store, const ModelParams& p, const Hyperparams& hp,
                          int budget, std::uint64_t seed) {
  const auto pairs = cost_sample(side, r, store, hp, budget, seed);
  return single_matrix_cost(side, r, concept_id, pairs, p, hp);
}

std::vector<std::size_t> bottom_k(std::span<const double> costs, std::size_t k) {
  std::vector<std::size_t> idx(costs.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return costs[a] < costs[b] || (costs[a] == costs[b] && a < b);
                    });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

// All m single-matrix costs of one (r, side). The fixed side's projection is
// computed once per triple; bitwise identical to single_matrix_cost.
std::vector<double> all_costs(Side side, RelationId r, std::span<const TrainingPair> pairs,
                              const ModelParams& p, const Hyperparams& hp,
                              const RelationAttention& att) {
  const std::size_t n = p.dim;
  const std::size_t m = p.num_concepts;
  std::vector<double> costs(m, 0.0);
  if (pairs.empty()) return costs;

  // For each pair: fixed-side projections of pos and neg.
  std::vector<double> fixed(pairs.size() * 2 * n);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    for (int s = 0; s < 2; ++s) {
      const Triple& x = s == 0 ? pairs[j].pos : pairs[j].neg;
      std::span<double> out(fixed.data() + (2 * j + s) * n, n);
      if (side == Side::kHead) {
        project(att.tail, p.concepts, n, p.entity_row(x.t), out);
      } else {
        project(att.head, p.concepts, n, p.entity_row(x.h), out);
      }
    }
  }
  auto rv = p.relation_row(r);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < m; ++i) {
    auto d = p.concept_matrix(i);
    double total = 0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      double f[2];
      for (int s = 0; s < 2; ++s) {
        const Triple& x = s == 0 ? pairs[j].pos : pairs[j].neg;
        std::span<const double> other(fixed.data() + (2 * j + s) * n, n);
        if (side == Side::kHead) {
          matvec(d, p.entity_row(x.h), y);
          f[s] = residual_norm(y, rv, other, hp.norm);
        } else {
          matvec(d, p.entity_row(x.t), y);
          f[s] = residual_norm(other, rv, y, hp.norm);
        }
      }
      total += hinge_loss(f[0], f[1], hp.margin);
    }
    costs[i] = total;
  }
  return costs;
}

}  // namespace

BlockUpdateResult block_update(ModelParams& p, const TripleStore& store, const Hyperparams& hp,
                               std::uint64_t seed) {
  BlockUpdateResult result;
  result.seed = seed;
  if (hp.model != ModelKind::kITransF || hp.attention != AttentionMode::kSparse) return result;
  const std::size_t R = p.num_relations;
  const auto k = static_cast<std::size_t>(hp.max_active);
  result.head_costs.resize(R);
  result.tail_costs.resize(R);
  for (std::size_t ri = 0; ri < R; ++ri) {
    const auto r = static_cast<RelationId>(ri);
    const auto att = relation_attention(p, hp, r);
    for (Side side : {Side::kHead, Side::kTail}) {
      const auto pairs = cost_sample(side, r, store, hp, hp.cost_budget, seed);
      auto costs = all_costs(side, r, pairs, p, hp, att);
      (side == Side::kHead ? result.head_costs : result.tail_costs)[ri] = std::move(costs);
    }
  }
  // Write only after every cost has been computed against the old attention.
  for (std::size_t ri = 0; ri < R; ++ri) {
    const auto r = static_cast<RelationId>(ri);
    for (Side side : {Side::kHead, Side::kTail}) {
      const auto& costs = (side == Side::kHead ? result.head_costs : result.tail_costs)[ri];
      auto bits = p.assignment(side, r);
      std::vector<std::uint8_t> next(bits.size(), 0);
      for (std::size_t i : bottom_k(costs, k)) next[i] = 1;
      for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != next[i]) ++result.changed_bits;
        bits[i] = next[i];
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Driver

TrainResult train(const TripleStore& store, const Hyperparams& hp, std::uint64_t seed,
                  const TrainOptions& options) {
  hp.validate();
  TrainState state(store, hp,  seed,
                   init_params(store.num_entities(), store.num_relations(), hp, seed,
                               options.warm_start));
  TrainResult result;
  const int block_stop = hp.effective_block_stop();
  const bool sparse = hp.model == ModelKind::kITransF && hp.attention == AttentionMode::kSparse;
  const bool early_stopping = options.validate && options.eval_every > 0 && options.patience > 0;

  double best_hits = -1;
  std::optional<ModelParams> best;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    const auto stats = sgd_epoch(state, store, hp);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = stats.mean_loss;
    rec.seconds = stats.seconds;

    if (sparse && epoch % hp.block_every == 0 && epoch <= block_stop) {
      std::optional<ModelParams> before;
      if (options.on_block_update) before = state.params;
      const auto res = block_update(state.params, store, hp, mix_seed(seed, 3, epoch));
      rec.block_updated = true;
      rec.changed_bits = res.changed_bits;
      if (options.on_block_update) options.on_block_update(epoch, *before, state.params, res);
    }

    bool stop = false;
    if (options.validate && options.eval_every > 0 && epoch % options.eval_every == 0) {
      const auto v = options.validate(state.params);
      rec.valid_hits10 = v.hits10;
      rec.valid_mean_rank = v.mean_rank;
      if (v.hits10 > best_hits) {
        best_hits = v.hits10;
        result.best_epoch = epoch;
        if (early_stopping) best = state.params;
      } else if (early_stopping && epoch - result.best_epoch >= options.patience) {
        stop = true;
      }
    }

    if (options.log != nullptr) {
      *options.log << "epoch " << epoch << " loss " << rec.mean_loss << " time " << rec.seconds
                   << "s";
      if (rec.block_updated) *options.log << " block_changed " << rec.changed_bits;
      if (rec.valid_hits10) {
        *options.log << " valid_mr " << *rec.valid_mean_rank << " valid_h10 " << *rec.valid_hits10;
      }
      *options.log << '\n';
    }
    if (options.on_checkpoint && options.checkpoint_every > 0 &&
        epoch % options.checkpoint_every == 0) {
      options.on_checkpoint(epoch, state.params);
    }
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
    result.epochs_run = epoch;
    if (stop) {
      result.early_stopped = true;
      break;
    }
  }
  result.params = best ? std::move(*best) : std::move(state.params);
  return result;
}

}  // namespace itransf
