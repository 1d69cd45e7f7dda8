#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rbias/data/dataset.hpp"

namespace rbias {

// A named subset of dataset rows. Members are sorted and unique.
struct Partition {
  std::string name;
  std::vector<std::size_t> members;
  std::size_t universe = 0;  // N of the dataset the indices refer to

  bool contains(std::size_t index) const;
  std::vector<std::size_t> complement() const;
  std::vector<bool> mask() const;
};

// Partition selector grammar:
//   class                      one partition per class
//   attribute:<name>           one partition per attribute value
//   attribute:<name>=<value>   the single group <value>, audited against the rest
//   class=<name>               the single class <name>
// "attr:" is accepted as a synonym for "attribute:".
struct PartitionSpec {
  enum class Kind { kClass, kAttribute };
  Kind kind = Kind::kClass;
  std::string attribute;
  std::string value;  // empty selects every value

  static PartitionSpec parse(const std::string& text);
  std::string to_string() const;
};

// One partition per distinct value, or the single requested group. Throws
// UnknownAttribute for a missing attribute, DegeneratePartition when fewer
// than two groups exist (the complement would be empty).
std::vector<Partition> partitions_of(const Dataset& dataset, const PartitionSpec& spec);

Partition make_partition(std::string name, std::vector<std::size_t> members,
                         std::size_t universe);

}  // namespace rbias
