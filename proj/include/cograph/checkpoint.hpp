#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cograph/tensor.hpp"

namespace cograph {

// Container of named tensors with a binary on-disk form. Entries are kept
// in name order, so serialization is independent of insertion order.
//
// Layout (all integers little-endian):
//   magic "CGCKPT01"
//   u64 entry count
//   per entry: u32 name length, name bytes, u32 rank, u64 dims[rank],
//              f64 data[prod(dims)]
class Checkpoint {
 public:
  void put(const std::string& name, const Tensor& t);
  void put_raw(const std::string& name, Shape shape, std::vector<double> values);

  bool contains(const std::string& name) const;
  const Shape& shape_of(const std::string& name) const;
  const std::vector<double>& values_of(const std::string& name) const;
  // Builds a fresh trainable tensor from a stored entry.
  Tensor take_param(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::map<std::string, std::pair<Shape, std::vector<double>>> entries_;
};

}  // namespace cograph
