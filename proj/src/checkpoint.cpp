#include "cograph/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "cograph/bytes.hpp"
#include "cograph/errors.hpp"

namespace cograph {

namespace {
constexpr char kMagic[8] = {'C', 'G', 'C', 'K', 'P', 'T', '0', '1'};
}

void Checkpoint::put(const std::string& name, const Tensor& t) {
  put_raw(name, t.shape(), t.values());
}

void Checkpoint::put_raw(const std::string& name, Shape shape,
                         std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError("Checkpoint::put_raw: " + shape_str(shape) +
                     " does not hold " + std::to_string(values.size()) +
                     " values");
  }
  entries_[name] = {std::move(shape), std::move(values)};
}

bool Checkpoint::contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const Shape& Checkpoint::shape_of(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("checkpoint has no tensor '" + name + "'");
  return it->second.first;
}

const std::vector<double>& Checkpoint::values_of(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("checkpoint has no tensor '" + name + "'");
  return it->second.second;
}

Tensor Checkpoint::take_param(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw Error("checkpoint has no tensor '" + name + "'");
  return Tensor::param(it->second.first, it->second.second);
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

std::string Checkpoint::serialize() const {
  std::string out(kMagic, sizeof kMagic);
  bytes::put_u64(out, entries_.size());
  for (const auto& [name, entry] : entries_) {
    const auto& [shape, values] = entry;
    bytes::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    bytes::put_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) bytes::put_u64(out, d);
    for (double v : values) bytes::put_f64(out, v);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& data) {
  bytes::Reader r{data};
  std::string magic = r.str(sizeof kMagic, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("bad checkpoint magic", 0);
  }
  Checkpoint ckpt;
  const std::uint64_t count = r.u64("entry count");
  for (std::uint64_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = r.u32("name length");
    std::string name = r.str(name_len, "name");
    const std::uint32_t rank = r.u32("rank");
    Shape shape(rank);
    std::size_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape[i] = static_cast<std::size_t>(r.u64("dimension"));
      total *= shape[i];
    }
    std::vector<double> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = r.f64("tensor data");
    if (ckpt.contains(name)) {
      throw ParseError("duplicate tensor '" + name + "'", r.pos);
    }
    ckpt.put_raw(name, std::move(shape), std::move(values));
  }
  r.expect_end();
  return ckpt;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::string data = serialize();
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("failed writing checkpoint to '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize(data);
}

}  // namespace cograph
