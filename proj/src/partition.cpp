#include "rbias/data/partition.hpp"

#include <algorithm>

#include "rbias/error.hpp"

namespace rbias {

bool Partition::contains(std::size_t index) const {
  return std::binary_search(members.begin(), members.end(), index);
}

std::vector<std::size_t> Partition::complement() const {
  std::vector<std::size_t> out;
  out.reserve(universe - members.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < universe; ++i) {
    if (next < members.size() && members[next] == i) {
      ++next;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<bool> Partition::mask() const {
  std::vector<bool> out(universe, false);
  for (std::size_t i : members) out[i] = true;
  return out;
}

Partition make_partition(std::string name, std::vector<std::size_t> members,
                         std::size_t universe) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.empty()) throw DegeneratePartition("partition '" + name + "' is empty");
  if (members.back() >= universe) {
    throw DataError("partition '" + name + "' references an index outside the dataset");
  }
  return Partition{std::move(name), std::move(members), universe};
}

PartitionSpec PartitionSpec::parse(const std::string& text) {
  PartitionSpec spec;
  if (text == "class") return spec;
  if (text.rfind("class=", 0) == 0) {
    spec.value = text.substr(6);
    if (spec.value.empty()) throw ConfigError("empty class name in partition spec");
    return spec;
  }
  std::string rest;
  if (text.rfind("attribute:", 0) == 0) {
    rest = text.substr(10);
  } else if (text.rfind("attr:", 0) == 0) {
    rest = text.substr(5);
  } else {
    throw ConfigError("partition spec must be 'class', 'class=<name>', 'attribute:<name>' or "
                      "'attribute:<name>=<value>', got '" + text + "'");
  }
  spec.kind = Kind::kAttribute;
  const auto eq = rest.find('=');
  spec.attribute = rest.substr(0, eq);
  if (eq != std::string::npos) {
    spec.value = rest.substr(eq + 1);
    if (spec.value.empty()) throw ConfigError("empty attribute value in partition spec");
  }
  if (spec.attribute.empty()) throw ConfigError("empty attribute name in partition spec");
  return spec;
}

std::string PartitionSpec::to_string() const {
  std::string out = kind == Kind::kClass ? "class" : "attribute:" + attribute;
  if (!value.empty()) out += "=" + value;
  return out;
}

std::vector<Partition> partitions_of(const Dataset& dataset, const PartitionSpec& spec) {
  const std::vector<int>* codes = &dataset.labels;
  const std::vector<std::string>* names = &dataset.class_names;
  std::string prefix = "class=";
  if (spec.kind == PartitionSpec::Kind::kAttribute) {
    const auto it = dataset.attributes.find(spec.attribute);
    if (it == dataset.attributes.end()) throw UnknownAttribute(spec.attribute);
    codes = &it->second.codes;
    names = &it->second.names;
    prefix = spec.attribute + "=";
  }

  std::vector<std::vector<std::size_t>> groups(names->size());
  for (std::size_t i = 0; i < codes->size(); ++i) {
    groups[static_cast<std::size_t>((*codes)[i])].push_back(i);
  }
  std::size_t non_empty = 0;
  for (const auto& g : groups) non_empty += g.empty() ? 0 : 1;
  if (non_empty < 2) {
    throw DegeneratePartition("partition by '" + spec.to_string() +
                              "' yields fewer than two groups");
  }

  std::vector<Partition> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    if (!spec.value.empty() && (*names)[g] != spec.value) continue;
    out.push_back(make_partition(prefix + (*names)[g], std::move(groups[g]), dataset.size()));
  }
  if (out.empty()) {
    throw DegeneratePartition("no rows have " + prefix + spec.value);
  }
  return out;
}

}  // namespace rbias
