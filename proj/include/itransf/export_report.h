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

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itransf/evaluation.h"
#include "itransf/kb_data.h"
#include "itransf/model.h"
#include "json.hpp"

namespace itransf {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

// A rectangular table rendered as CSV or as a JSON array of row objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Writes table as CSV to path and as JSON to path with extension ".json".
void write_table(const Table& table, const std::filesystem::path& path);

struct HeatmapData {
  std::vector<std::string> row_labels;  // "relation(H)" / "relation(T)"
  std::size_t num_concepts = 0;
  std::vector<std::vector<double>> weights;
};

// One row per (relation, side); `relations` selects by name (empty = all).
// Unknown names raise ArgumentError listing the valid ones.
HeatmapData make_heatmap(const AttentionSnapshot& snapshot, const Vocab& vocab,
                         const std::vector<std::string>& relations = {});
Table attention_table(const HeatmapData& heatmap);
void export_attention(const AttentionSnapshot& snapshot, const Vocab& vocab,
                      const std::filesystem::path& path,
                      const std::vector<std::string>& relations = {});

// Relations by descending training frequency (ties by id) with natural-log
// frequency.
Table frequency_table(const TripleStore& store, const Vocab& vocab);
void export_frequency(const TripleStore& store, const Vocab& vocab,
                      const std::filesystem::path& path);

using NamedReport = std::pair<std::string, EvalReport>;

// Per-bin relation-averaged Hits@10, one column per model. Every report must
// carry per-bin results for exactly bins.num_bins() bins.
Table bin_comparison_table(const std::vector<NamedReport>& reports, const FrequencyBins& bins);
void export_bin_comparison(const std::vector<NamedReport>& reports, const FrequencyBins& bins,
                           const std::filesystem::path& path);

// Per-relation metrics of one report (relations with queries only).
Table per_relation_table(const EvalReport& report, const Vocab& vocab, const TripleStore& store);

}  // namespace itransf
