#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "visrank/errors.hpp"
#include "visrank/util.hpp"

namespace visrank {

struct EmbeddingLoadReport {
  std::size_t loaded = 0;
  std::size_t duplicates = 0;   // repeated tokens, first occurrence kept
  std::size_t zero_norm = 0;    // vectors skipped for having no magnitude
};

// Token -> dense vector map with a fixed dimensionality. Immutable once
// loaded; lookups are safe from any number of threads.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // Text vector format: optional "<vocab> <dim>" header line, then one token
  // followed by dim decimal components per line.
  static EmbeddingTable load(std::istream& in, EmbeddingLoadReport* report = nullptr);
  static EmbeddingTable load_file(const std::string& path, EmbeddingLoadReport* report = nullptr);

  void insert(std::string_view token, std::span<const double> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view token) const;

  // Direct lookup of a stored vector (normalized token), empty span if absent.
  std::span<const double> find(std::string_view token) const;

  // Lookup with compound-label handling: a direct hit wins; otherwise the
  // label is split on '_' and spaces and the found parts are averaged. Absent
  // when nothing matches or the average has no magnitude.
  std::optional<std::vector<double>> vector_for(std::string_view label) const;

  // Cosine of the two tokens' vectors; absent when either is out of
  // vocabulary.
  std::optional<double> similarity(std::string_view word, std::string_view context_label) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;

  static double cosine(std::span<const double> a, std::span<const double> b);

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<std::string> tokens_;
  StringMap<std::uint32_t> index_;
};

}  // namespace visrank
