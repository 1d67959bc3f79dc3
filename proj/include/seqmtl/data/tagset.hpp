#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seqmtl/core/error.hpp"

namespace seqmtl {

using TagIndex = std::size_t;

enum class Bio { outside, begin, inside };

/// The label set {O} u {B,I} x T, laid out as O, B-t1, I-t1, ..., B-tn, I-tn.
class TagSet {
 public:
  TagSet() : TagSet(std::vector<std::string>{}) {}

  /// Component types are deduplicated and sorted alphabetically.
  explicit TagSet(std::vector<std::string> types) : types_(std::move(types)) {
    std::sort(types_.begin(), types_.end());
    types_.erase(std::unique(types_.begin(), types_.end()), types_.end());
    tags_.push_back("O");
    for (const auto& t : types_) {
      tags_.push_back("B-" + t);
      tags_.push_back("I-" + t);
    }
    for (std::size_t i = 0; i < tags_.size(); ++i) index_.emplace(tags_[i], i);
  }

  std::size_t size() const noexcept { return tags_.size(); }
  const std::vector<std::string>& types() const noexcept { return types_; }
  const std::vector<std::string>& tags() const noexcept { return tags_; }
  const std::string& name(TagIndex i) const { return tags_.at(i); }

  static constexpr TagIndex outside() { return 0; }
  TagIndex begin_of(std::size_t type) const { return 1 + 2 * type; }
  TagIndex inside_of(std::size_t type) const { return 2 + 2 * type; }

  std::optional<TagIndex> find(std::string_view tag) const {
    auto it = index_.find(std::string(tag));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TagIndex index(std::string_view tag) const {
    if (auto i = find(tag)) return *i;
    throw Error(ErrorKind::index_out_of_range, "tag '" + std::string(tag) + "' not in tag set");
  }

  std::optional<std::size_t> type_index(std::string_view type) const {
    auto it = std::lower_bound(types_.begin(), types_.end(), type);
    if (it == types_.end() || *it != type) return std::nullopt;
    return static_cast<std::size_t>(it - types_.begin());
  }

  static Bio bio(TagIndex i) {
    if (i == 0) return Bio::outside;
    return (i % 2 == 1) ? Bio::begin : Bio::inside;
  }

  /// Component type of a B/I tag; nullopt for O.
  static std::optional<std::size_t> type_of(TagIndex i) {
    if (i == 0) return std::nullopt;
    return (i - 1) / 2;
  }

  /// False when b is an I-tag that cannot continue a: after O, or after a
  /// B/I of a different type.
  static bool valid_transition(TagIndex a, TagIndex b) {
    if (bio(b) != Bio::inside) return true;
    if (a == 0) return false;
    return type_of(a) == type_of(b);
  }

  static bool valid_start(TagIndex b) { return bio(b) != Bio::inside; }

  bool operator==(const TagSet& o) const { return types_ == o.types_; }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagIndex> index_;
};

/// Splits "B-claim" into (Bio::begin, "claim"); "O" into (Bio::outside, "").
inline std::pair<Bio, std::string> split_tag(std::string_view tag) {
  if (tag == "O") return {Bio::outside, {}};
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    const std::string_view type = tag.substr(2);
    const bool ok = std::all_of(type.begin(), type.end(), [](char ch) {
      return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_';
    });
    if (ok) return {tag[0] == 'B' ? Bio::begin : Bio::inside, std::string(type)};
  }
  throw Error(ErrorKind::unknown_tag_prefix, "cannot interpret tag '" + std::string(tag) + "'");
}

}  // namespace seqmtl
