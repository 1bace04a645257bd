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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itransf/model.h"
#include "json.hpp"

namespace itransf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

// Environment variable naming the root that holds one directory per dataset.
inline constexpr const char* kDataDirEnv = "ITRANSF_DATA_DIR";

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DatasetDefaults {
  double margin;
  int dim;
  int batch_size;
  double lr;
  int num_concepts;
};

// Published settings for "wn18" and "fb15k" (case-insensitive); nullopt
// for anything else.
std::optional<DatasetDefaults> dataset_defaults(std::string_view name);

struct RunConfig {
  std::string dataset;
  std::filesystem::path data_dir;
  std::filesystem::path train_path, valid_path, test_path;
  Hyperparams hp;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  unsigned threads = 1;
  int eval_every = 10;
  int patience = 200;
  bool early_stop = true;
  std::size_t valid_max = 1000;
  int checkpoint_every = 0;
  std::filesystem::path init_from;
};

nlohmann::json to_json(const RunConfig& c);
// key=value lines accepted back by --config.
std::string to_flat_config(const RunConfig& c);

// Runs one command. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itransf::cli
