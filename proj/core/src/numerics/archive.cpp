// Copyright 2026 The demorl Authors
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

#include "demorl/numerics/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "demorl/errors.hpp"

namespace demorl {
namespace {

constexpr char kMagic[8] = {'D', 'M', 'R', 'L', 'A', 'R', 'C', '1'};

static_assert(std::endian::native == std::endian::little,
              "archive format assumes a little-endian host");

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
void write_pod(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IntegrityError("archive: truncated data");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

void Archive::put(const std::string& name, std::vector<std::uint64_t> shape,
                  std::span<const double> values) {
  if (element_count(shape) != values.size()) {
    throw DimensionError("archive: shape does not match value count for '" + name + "'");
  }
  Entry e;
  e.dtype = DType::kF64;
  e.shape = std::move(shape);
  e.f64.assign(values.begin(), values.end());
  entries_[name] = std::move(e);
}

void Archive::put(const std::string& name, const Matrix& m) {
  std::vector<double> row_major(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row_major[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  put(name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
      row_major);
}

void Archive::put(const std::string& name, double value) {
  put(name, std::vector<std::uint64_t>{}, std::span<const double>(&value, 1));
}

void Archive::put_u64(const std::string& name, std::span<const std::uint64_t> values) {
  Entry e;
  e.dtype = DType::kU64;
  e.shape = {values.size()};
  e.u64.assign(values.begin(), values.end());
  entries_[name] = std::move(e);
}

void Archive::put_u64(const std::string& name, std::uint64_t value) {
  put_u64(name, std::span<const std::uint64_t>(&value, 1));
}

void Archive::put_text(const std::string& name, std::string_view text) {
  Entry e;
  e.dtype = DType::kBytes;
  e.shape = {text.size()};
  e.bytes.assign(text);
  entries_[name] = std::move(e);
}

bool Archive::contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const Archive::Entry& Archive::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw IntegrityError("archive: missing entry '" + name + "'");
  return it->second;
}

Matrix Archive::matrix(const std::string& name) const {
  const Entry& e = get(name);
  if (e.dtype != DType::kF64 || e.shape.size() != 2) {
    throw IntegrityError("archive: '" + name + "' is not a rank-2 f64 array");
  }
  const auto rows = static_cast<Eigen::Index>(e.shape[0]);
  const auto cols = static_cast<Eigen::Index>(e.shape[1]);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = e.f64[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return m;
}

Vector Archive::vector(const std::string& name) const {
  const Entry& e = get(name);
  if (e.dtype != DType::kF64) throw IntegrityError("archive: '" + name + "' is not f64");
  Vector v(static_cast<Eigen::Index>(e.f64.size()));
  for (std::size_t i = 0; i < e.f64.size(); ++i) v[static_cast<Eigen::Index>(i)] = e.f64[i];
  return v;
}

double Archive::scalar(const std::string& name) const {
  const Entry& e = get(name);
  if (e.dtype != DType::kF64 || e.f64.size() != 1) {
    throw IntegrityError("archive: '" + name + "' is not an f64 scalar");
  }
  return e.f64[0];
}

std::vector<std::uint64_t> Archive::u64s(const std::string& name) const {
  const Entry& e = get(name);
  if (e.dtype != DType::kU64) throw IntegrityError("archive: '" + name + "' is not u64");
  return e.u64;
}

std::uint64_t Archive::u64(const std::string& name) const {
  auto v = u64s(name);
  if (v.size() != 1) throw IntegrityError("archive: '" + name + "' is not a u64 scalar");
  return v[0];
}

std::string Archive::text(const std::string& name) const {
  const Entry& e = get(name);
  if (e.dtype != DType::kBytes) throw IntegrityError("archive: '" + name + "' is not text");
  return e.bytes;
}

std::vector<std::string> Archive::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

std::string Archive::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(entries_.size()));
  for (const auto& [name, e] : entries_) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    write_pod(out, static_cast<std::uint8_t>(e.dtype));
    write_pod(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) write_pod(out, d);
    switch (e.dtype) {
      case DType::kF64:
        out.append(reinterpret_cast<const char*>(e.f64.data()), e.f64.size() * sizeof(double));
        break;
      case DType::kU64:
        out.append(reinterpret_cast<const char*>(e.u64.data()),
                   e.u64.size() * sizeof(std::uint64_t));
        break;
      case DType::kBytes:
        out += e.bytes;
        break;
    }
  }
  write_pod(out, fnv1a(out));
  return out;
}

Archive Archive::deserialize(std::string_view data) {
  if (data.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IntegrityError("archive: bad magic");
  }
  const std::string_view body = data.substr(0, data.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, data.data() + body.size(), sizeof(stored));
  if (stored != fnv1a(body)) throw IntegrityError("archive: checksum mismatch");

  Reader rd(body);
  rd.bytes(sizeof(kMagic));
  const auto version = rd.pod<std::uint32_t>();
  if (version != kVersion) {
    throw IntegrityError("archive: unsupported version " + std::to_string(version));
  }
  const auto count = rd.pod<std::uint64_t>();
  Archive ar;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = rd.pod<std::uint32_t>();
    std::string name(rd.bytes(name_len));
    Entry e;
    const auto dtype = rd.pod<std::uint8_t>();
    if (dtype > 2) throw IntegrityError("archive: unknown dtype");
    e.dtype = static_cast<DType>(dtype);
    const auto rank = rd.pod<std::uint32_t>();
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(rd.pod<std::uint64_t>());
    const std::uint64_t n = element_count(e.shape);
    switch (e.dtype) {
      case DType::kF64: {
        auto raw = rd.bytes(n * sizeof(double));
        e.f64.resize(n);
        std::memcpy(e.f64.data(), raw.data(), raw.size());
        break;
      }
      case DType::kU64: {
        auto raw = rd.bytes(n * sizeof(std::uint64_t));
        e.u64.resize(n);
        std::memcpy(e.u64.data(), raw.data(), raw.size());
        break;
      }
      case DType::kBytes:
        e.bytes.assign(rd.bytes(n));
        break;
    }
    ar.entries_[std::move(name)] = std::move(e);
  }
  if (rd.pos() != body.size()) throw IntegrityError("archive: trailing bytes");
  return ar;
}

void Archive::save(const std::filesystem::path& path) const {
  const std::string data = serialize();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("archive: cannot open '" + tmp + "' for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os) throw Error("archive: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IntegrityError("archive: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize(ss.str());
}

void put_mlp(Archive& ar, const std::string& prefix, const MlpParams& params) {
  std::vector<std::uint64_t> acts;
  for (auto a : params.hidden_activations) acts.push_back(static_cast<std::uint64_t>(a));
  ar.put_u64(prefix + "/hidden_activations", acts);
  ar.put_u64(prefix + "/output_activation",
             static_cast<std::uint64_t>(params.output_activation));
  ar.put_u64(prefix + "/num_layers", params.layers.size());
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const std::string base = prefix + "/layer" + std::to_string(i);
    ar.put(base + "/weight", params.layers[i].weight);
    ar.put(base + "/bias", Matrix(params.layers[i].bias));
  }
}

MlpParams get_mlp(const Archive& ar, const std::string& prefix) {
  MlpParams p;
  for (auto a : ar.u64s(prefix + "/hidden_activations")) {
    if (a > 2) throw IntegrityError("archive: bad activation tag");
    p.hidden_activations.push_back(static_cast<Activation>(a));
  }
  const auto out_act = ar.u64(prefix + "/output_activation");
  if (out_act > 2) throw IntegrityError("archive: bad activation tag");
  p.output_activation = static_cast<Activation>(out_act);
  const auto n = ar.u64(prefix + "/num_layers");
  if (n == 0 || p.hidden_activations.size() + 1 != n) {
    throw IntegrityError("archive: inconsistent layer count for '" + prefix + "'");
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::string base = prefix + "/layer" + std::to_string(i);
    DenseLayer layer{ar.matrix(base + "/weight"), ar.vector(base + "/bias")};
    if (layer.bias.size() != layer.weight.rows()) {
      throw IntegrityError("archive: bias/weight mismatch in '" + base + "'");
    }
    if (!p.layers.empty() && p.layers.back().weight.rows() != layer.weight.cols()) {
      throw IntegrityError("archive: layer shapes do not chain in '" + prefix + "'");
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void put_optim(Archive& ar, const std::string& prefix, const OptimState& state) {
  const double cfg[4] = {state.config.learning_rate, state.config.beta1,
                         state.config.beta2, state.config.epsilon};
  ar.put(prefix + "/config", {4}, cfg);
  ar.put_u64(prefix + "/step", static_cast<std::uint64_t>(state.step));
  ar.put_u64(prefix + "/blocks", state.first_moment.size());
  for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
    const std::string base = prefix + "/block" + std::to_string(i);
    const auto& m = state.first_moment[i];
    const auto& v = state.second_moment[i];
    ar.put(base + "/m", {static_cast<std::uint64_t>(m.size())},
           std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
    ar.put(base + "/v", {static_cast<std::uint64_t>(v.size())},
           std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  }
}

OptimState get_optim(const Archive& ar, const std::string& prefix) {
  OptimState s;
  const Vector cfg = ar.vector(prefix + "/config");
  if (cfg.size() != 4) throw IntegrityError("archive: bad optimizer config");
  s.config = {cfg[0], cfg[1], cfg[2], cfg[3]};
  s.step = static_cast<std::int64_t>(ar.u64(prefix + "/step"));
  const auto blocks = ar.u64(prefix + "/blocks");
  for (std::uint64_t i = 0; i < blocks; ++i) {
    const std::string base = prefix + "/block" + std::to_string(i);
    s.first_moment.push_back(ar.vector(base + "/m"));
    s.second_moment.push_back(ar.vector(base + "/v"));
  }
  return s;
}

}  // namespace demorl
