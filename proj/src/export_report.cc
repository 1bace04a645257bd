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
#include "itransf/export_report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "itransf/errors.h"

namespace itransf {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(columns);
  for (const auto& row : rows) line(row);
  return out;
}

nlohmann::json Table::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) {
      // Numeric cells stay numeric in the JSON mirror.
      const std::string& cell = row[i];
      double v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (!cell.empty() && res.ec == std::errc() && res.ptr == cell.data() + cell.size() &&
          std::isfinite(v)) {
        obj[columns[i]] = v;
      } else if (cell == "nan") {
        obj[columns[i]] = nullptr;
      } else {
        obj[columns[i]] = cell;
      }
    }
    arr.push_back(std::move(obj));
  }
  return {{"columns", columns}, {"rows", arr}};
}

void write_table(const Table& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << table.to_csv();
  }
  auto json_path = path;
  json_path.replace_extension(".json");
  std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + json_path.string());
  out << table.to_json().dump(2) << '\n';
}

HeatmapData make_heatmap(const AttentionSnapshot& snapshot, const Vocab& vocab,
                         const std::vector<std::string>& relations) {
  std::vector<RelationId> ids;
  if (relations.empty()) {
    ids.resize(snapshot.head.size());
    std::iota(ids.begin(), ids.end(), 0);
  } else {
    for (const auto& name : relations) {
      auto id = vocab.find_relation(name);
      if (!id) {
        std::string valid;
        for (const auto& n : vocab.relation_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ArgumentError("unknown relation '" + name + "'; valid names: " + valid);
      }
      ids.push_back(*id);
    }
  }
  HeatmapData hm;
  hm.num_concepts = snapshot.num_concepts;
  for (RelationId r : ids) {
    if (static_cast<std::size_t>(r) >= snapshot.head.size()) {
      throw ArgumentError("relation id outside snapshot");
    }
    hm.row_labels.push_back(vocab.relation_name(r) + "(H)");
    hm.weights.push_back(snapshot.head[r]);
    hm.row_labels.push_back(vocab.relation_name(r) + "(T)");
    hm.weights.push_back(snapshot.tail[r]);
  }
  return hm;
}

Table attention_table(const HeatmapData& heatmap) {
  Table t;
  t.columns.push_back("row");
  for (std::size_t i = 0; i < heatmap.num_concepts; ++i) {
    t.columns.push_back("concept_" + std::to_string(i));
  }
  for (std::size_t j = 0; j < heatmap.row_labels.size(); ++j) {
    std::vector<std::string> row{heatmap.row_labels[j]};
    for (double w : heatmap.weights[j]) row.push_back(format_double(w));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void export_attention(const AttentionSnapshot& snapshot, const Vocab& vocab,
                      const std::filesystem::path& path,
                      const std::vector<std::string>& relations) {
  write_table(attention_table(make_heatmap(snapshot, vocab, relations)), path);
}

Table frequency_table(const TripleStore& store, const Vocab& vocab) {
  std::vector<RelationId> ids(store.num_relations());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](RelationId a, RelationId b) {
    return store.frequency(a) > store.frequency(b);
  });
  Table t;
  t.columns = {"relation", "frequency", "log_frequency"};
  for (RelationId r : ids) {
    const auto f = store.frequency(r);
    t.rows.push_back({vocab.relation_name(r), std::to_string(f),
                      f > 0 ? format_double(std::log(static_cast<double>(f))) : "nan"});
  }
  return t;
}

void export_frequency(const TripleStore& store, const Vocab& vocab,
                      const std::filesystem::path& path) {
  write_table(frequency_table(store, vocab), path);
}

Table bin_comparison_table(const std::vector<NamedReport>& reports, const FrequencyBins& bins) {
  const int nb = bins.num_bins();
  for (const auto& [name, report] : reports) {
    if (static_cast<int>(report.per_bin.size()) != nb) {
      throw ArgumentError("bin mismatch: report '" + name + "' has " +
                          std::to_string(report.per_bin.size()) + " bins, expected " +
                          std::to_string(nb));
    }
  }
  Table t;
  t.columns = {"bin", "log_freq_low", "log_freq_high", "relations"};
  for (const auto& [name, report] : reports) t.columns.push_back(name);
  for (int b = 0; b < nb; ++b) {
    const auto members = std::count(bins.bin_of_relation.begin(), bins.bin_of_relation.end(), b);
    std::vector<std::string> row{std::to_string(b), format_double(bins.boundaries[b]),
                                 format_double(bins.boundaries[b + 1]), std::to_string(members)};
    for (const auto& [name, report] : reports) row.push_back(format_double(report.per_bin[b]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void export_bin_comparison(const std::vector<NamedReport>& reports, const FrequencyBins& bins,
                           const std::filesystem::path& path) {
  write_table(bin_comparison_table(reports, bins), path);
}

Table per_relation_table(const EvalReport& report, const Vocab& vocab, const TripleStore& store) {
  Table t;
  t.columns = {"relation", "train_frequency", "queries", "mean_rank", "hits_at_10"};
  for (std::size_t r = 0; r < report.per_relation.size(); ++r) {
    const auto& m = report.per_relation[r];
    if (m.count == 0) continue;
    const auto id = static_cast<RelationId>(r);
    t.rows.push_back({vocab.relation_name(id), std::to_string(store.frequency(id)),
                      std::to_string(m.count), format_double(m.mean_rank),
                      format_double(m.hits_at_10)});
  }
  return t;
}

}  // namespace itransf
