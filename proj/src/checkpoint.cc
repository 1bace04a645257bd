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
#include "itransf/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "itransf/errors.h"

namespace itransf {
namespace {

constexpr char kMagic[8] = {'I', 'T', 'F', 'C', 'K', 'P', 'T', '\0'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw CheckpointError("truncated checkpoint");
  }
  return v;
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void get_array(std::istream& in, std::vector<T>& v, std::size_t n) {
  v.resize(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw CheckpointError("truncated checkpoint payload");
  }
}

struct ArraySpec {
  const char* name;
  const char* dtype;
};

constexpr ArraySpec kArrays[] = {
    {"entity", "f64"},      {"relation", "f64"},    {"concepts", "f64"},
    {"head_scores", "f64"}, {"tail_scores", "f64"}, {"head_assign", "u8"},
    {"tail_assign", "u8"},
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  nlohmann::json header;
  header["hyperparams"] = to_json(ckpt.hp);
  header["vocab_fingerprint"] = ckpt.vocab_fingerprint;
  header["shape"] = {{"num_entities", p.num_entities},
                     {"num_relations", p.num_relations},
                     {"dim", p.dim},
                     {"num_concepts", p.num_concepts}};
  const std::size_t sizes[] = {p.entity.size(),      p.relation.size(),    p.concepts.size(),
                               p.head_scores.size(), p.tail_scores.size(), p.head_assign.size(),
                               p.tail_assign.size()};
  auto& arrays = header["arrays"] = nlohmann::json::array();
  for (std::size_t i = 0; i < std::size(kArrays); ++i) {
    arrays.push_back({{"name", kArrays[i].name}, {"dtype", kArrays[i].dtype}, {"size", sizes[i]}});
  }
  header["extra"] = ckpt.extra;

  const std::string text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put_array(out, p.entity);
  put_array(out, p.relation);
  put_array(out, p.concepts);
  put_array(out, p.head_scores);
  put_array(out, p.tail_scores);
  put_array(out, p.head_assign);
  put_array(out, p.tail_assign);
  if (!out) throw CheckpointError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = get<std::uint64_t>(in);
  if (len > (1ULL << 30)) throw CheckpointError("checkpoint header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw CheckpointError("truncated checkpoint header");
  }

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.hp = hyperparams_from_json(header.at("hyperparams"));
    ckpt.vocab_fingerprint = header.at("vocab_fingerprint").get<std::uint64_t>();
    ckpt.extra = header.value("extra", nlohmann::json::object());
    auto& p = ckpt.params;
    const auto& shape = header.at("shape");
    p.num_entities = shape.at("num_entities");
    p.num_relations = shape.at("num_relations");
    p.dim = shape.at("dim");
    p.num_concepts = shape.at("num_concepts");

    const auto& arrays = header.at("arrays");
    if (arrays.size() != std::size(kArrays)) throw CheckpointError("unexpected array table");
    std::size_t sizes[std::size(kArrays)];
    for (std::size_t i = 0; i < std::size(kArrays); ++i) {
      if (arrays[i].at("name") != kArrays[i].name || arrays[i].at("dtype") != kArrays[i].dtype) {
        throw CheckpointError("unexpected array table entry " + arrays[i].dump());
      }
      sizes[i] = arrays[i].at("size");
    }
    const std::size_t n = p.dim, m = p.num_concepts, rr = p.num_relations;
    const std::size_t expected[] = {p.num_entities * n, rr * n, m * n * n, rr * m, rr * m,
                                    rr * m, rr * m};
    for (std::size_t i = 0; i < std::size(kArrays); ++i) {
      if (sizes[i] != expected[i]) {
        throw CheckpointError(std::string("array '") + kArrays[i].name +
                              "' has size inconsistent with declared shape");
      }
    }
    get_array(in, p.entity, sizes[0]);
    get_array(in, p.relation, sizes[1]);
    get_array(in, p.concepts, sizes[2]);
    get_array(in, p.head_scores, sizes[3]);
    get_array(in, p.tail_scores, sizes[4]);
    get_array(in, p.head_assign, sizes[5]);
    get_array(in, p.tail_assign, sizes[6]);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ArgumentError& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    write_checkpoint(out, ckpt);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace itransf
