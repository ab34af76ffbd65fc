// Copyright 2026 The LSI Authors
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

#include "lsi/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "json.hpp"

namespace lsi::nn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

constexpr char kMagic[4] = {'L', 'S', 'I', 'C'};

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

void put_matrix(std::vector<std::uint8_t>& payload, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put(payload, static_cast<float>(m(i, j)));
}

Matrix get_matrix(const std::vector<std::uint8_t>& bytes, std::size_t base, std::size_t offset, Eigen::Index rows,
                  Eigen::Index cols) {
  std::size_t pos = base + offset;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<double>(get<float>(bytes, pos));
  return m;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ParameterStore& store, std::string_view config_json) {
  nlohmann::json manifest;
  manifest["format"] = "f32le-rowmajor";
  manifest["step"] = store.step;
  manifest["config"] = config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json);
  nlohmann::json arrays = nlohmann::json::array();

  std::vector<std::uint8_t> payload;
  for (const auto& e : store.entries()) {
    nlohmann::json a;
    a["name"] = e.name;
    a["shape"] = {e.value.rows(), e.value.cols()};
    a["trainable"] = e.trainable;
    a["offset"] = payload.size();
    put_matrix(payload, e.value);
    a["ema_offset"] = payload.size();
    put_matrix(payload, e.ema);
    arrays.push_back(std::move(a));
  }
  manifest["arrays"] = std::move(arrays);
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not an LSIC checkpoint (bad magic)");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto len = get<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw std::runtime_error("checkpoint manifest truncated");
  const std::string text(reinterpret_cast<const char*>(bytes.data() + pos), static_cast<std::size_t>(len));
  pos += static_cast<std::size_t>(len);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error(std::string("checkpoint manifest is not valid JSON: ") + ex.what());
  }

  LoadedCheckpoint out;
  out.store.step = manifest.at("step").get<std::int64_t>();
  out.config_json = manifest.at("config").dump();
  const std::size_t base = pos;
  for (const auto& a : manifest.at("arrays")) {
    const auto rows = a.at("shape").at(0).get<Eigen::Index>();
    const auto cols = a.at("shape").at(1).get<Eigen::Index>();
    const std::size_t need = static_cast<std::size_t>(rows * cols) * sizeof(float);
    const auto off = a.at("offset").get<std::size_t>();
    const auto ema_off = a.at("ema_offset").get<std::size_t>();
    if (base + off + need > bytes.size() || base + ema_off + need > bytes.size())
      throw std::runtime_error("checkpoint payload truncated");
    auto& e = out.store.add(a.at("name").get<std::string>(), get_matrix(bytes, base, off, rows, cols),
                            a.at("trainable").get<bool>());
    e.ema = get_matrix(bytes, base, ema_off, rows, cols);
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store, std::string_view config_json) {
  const auto bytes = serialize_checkpoint(store, config_json);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace lsi::nn
