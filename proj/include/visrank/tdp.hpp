#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "visrank/dataset_io.hpp"
#include "visrank/errors.hpp"
#include "visrank/util.hpp"

namespace visrank {

// Conditional word-given-context probabilities estimated from co-occurrence
// counts over annotated records. Immutable once fitted; queries are safe from
// any number of threads.
class TdpTable {
 public:
  static constexpr double kDefaultFloor = 1e-6;

  TdpTable() = default;

  // Counts, per record, the gold word against each distinct context label.
  static TdpTable fit(std::span<const EvalRecord> training, double floor = kDefaultFloor);

  // count(w,c)/count(c) when the pair was seen, floor otherwise.
  double prob(std::string_view word, std::string_view context_label) const;

  std::uint64_t pair_count(std::string_view word, std::string_view context_label) const;
  std::uint64_t context_count(std::string_view context_label) const;

  double floor() const noexcept { return floor_; }
  std::size_t pair_entries() const noexcept;
  std::size_t context_entries() const noexcept { return context_counts_.size(); }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static TdpTable load(std::istream& in);
  static TdpTable load_file(const std::string& path);

 private:
  static void validate_floor(double floor);

  double floor_ = kDefaultFloor;
  StringMap<StringMap<std::uint64_t>> pair_counts_;  // word -> context -> count
  StringMap<std::uint64_t> context_counts_;
};

}  // namespace visrank
