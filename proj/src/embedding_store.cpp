#include "visrank/embedding_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace visrank {

namespace {

bool parse_header(const std::vector<std::string_view>& fields,
                  std::uint64_t& vocab, std::uint64_t& dim) {
  if (fields.size() != 2) return false;
  std::optional<std::uint64_t> v = util::parse_u64(fields[0]);
  std::optional<std::uint64_t> d = util::parse_u64(fields[1]);
  if (!v.has_value() || !d.has_value()) return false;
  vocab = *v;
  dim = *d;
  return true;
}

[[noreturn]] void fail_format(std::size_t line_number, const std::string& what) {
  throw FormatError("line " + std::to_string(line_number) + ": " + what);
}

double norm_squared(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(std::istream& in, EmbeddingLoadReport* report) {
  EmbeddingTable table;
  EmbeddingLoadReport local;
  std::string line;
  std::size_t line_number = 0;
  bool first_content_line = true;

  while (std::getline(in, line)) {
    ++line_number;
    std::vector<std::string_view> fields = util::split_whitespace(line);
    if (fields.empty()) continue;

    if (first_content_line) {
      first_content_line = false;
      std::uint64_t declared_vocab = 0;
      std::uint64_t declared_dim = 0;
      if (parse_header(fields, declared_vocab, declared_dim)) {
        if (declared_dim == 0) fail_format(line_number, "header declares dimension 0");
        table.dim_ = static_cast<std::size_t>(declared_dim);
        continue;
      }
      // No header: dimensionality is inferred from the first vector line.
      if (fields.size() < 2) fail_format(line_number, "expected a token and at least one component");
      table.dim_ = fields.size() - 1;
    }

    std::string token(fields[0]);
    if (fields.size() != table.dim_ + 1) {
      fail_format(line_number, "expected " + std::to_string(table.dim_) +
                                   " components for token '" + token + "', got " +
                                   std::to_string(fields.size() - 1));
    }

    std::vector<double> vec(table.dim_);
    for (std::size_t i = 0; i < table.dim_; ++i) {
      std::optional<double> value = util::parse_double(fields[i + 1]);
      if (!value.has_value()) {
        fail_format(line_number,
                    "component " + std::to_string(i) + " of '" + token + "' is not a number");
      }
      if (!std::isfinite(*value)) {
        fail_format(line_number,
                    "component " + std::to_string(i) + " of '" + token + "' is not finite");
      }
      vec[i] = *value;
    }

    if (table.index_.find(token) != table.index_.end()) {
      ++local.duplicates;
      util::warn("duplicate embedding token '" + token + "' on line " +
                 std::to_string(line_number) + ", keeping first");
      continue;
    }
    if (norm_squared(vec) == 0.0) {
      ++local.zero_norm;
      util::warn("zero-magnitude vector for '" + token + "' on line " +
                 std::to_string(line_number) + ", skipped");
      continue;
    }

    table.index_.emplace(token, static_cast<std::uint32_t>(table.tokens_.size()));
    table.tokens_.push_back(std::move(token));
    table.data_.insert(table.data_.end(), vec.begin(), vec.end());
    ++local.loaded;
  }

  if (report != nullptr) *report = local;
  return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path, EmbeddingLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
  return load(in, report);
}

void EmbeddingTable::insert(std::string_view token, std::span<const double> vector) {
  if (token.empty()) throw std::invalid_argument("embedding token is empty");
  if (vector.empty()) throw std::invalid_argument("embedding vector is empty");
  if (dim_ == 0) {
    dim_ = vector.size();
  } else if (vector.size() != dim_) {
    throw std::invalid_argument("embedding dimension mismatch: expected " +
                                std::to_string(dim_) + ", got " + std::to_string(vector.size()));
  }
  if (index_.find(token) != index_.end()) {
    throw std::invalid_argument("duplicate embedding token: " + std::string(token));
  }
  for (double x : vector) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("non-finite component in vector for: " + std::string(token));
    }
  }
  if (norm_squared(vector) == 0.0) {
    throw std::invalid_argument("zero-magnitude vector for: " + std::string(token));
  }
  index_.emplace(std::string(token), static_cast<std::uint32_t>(tokens_.size()));
  tokens_.emplace_back(token);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

std::span<const double> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return {};
  return std::span<const double>(data_.data() + static_cast<std::size_t>(it->second) * dim_, dim_);
}

std::optional<std::vector<double>> EmbeddingTable::vector_for(std::string_view label) const {
  std::span<const double> direct = find(label);
  if (!direct.empty()) {
    return std::vector<double>(direct.begin(), direct.end());
  }

  // Compound labels like "parking_lot" fall back to the mean of their parts.
  std::string splittable(label);
  std::replace(splittable.begin(), splittable.end(), '_', ' ');
  std::vector<std::string_view> parts = util::split_whitespace(splittable);
  if (parts.size() < 2) return std::nullopt;

  std::vector<double> sum(dim_, 0.0);
  std::size_t found = 0;
  for (std::string_view part : parts) {
    std::span<const double> v = find(part);
    if (v.empty()) continue;
    for (std::size_t i = 0; i < dim_; ++i) sum[i] += v[i];
    ++found;
  }
  if (found == 0) return std::nullopt;
  for (double& x : sum) x /= static_cast<double>(found);
  if (norm_squared(sum) == 0.0) return std::nullopt;
  return sum;
}

std::optional<double> EmbeddingTable::similarity(std::string_view word,
                                                std::string_view context_label) const {
  std::span<const double> wv = find(word);
  if (wv.empty()) return std::nullopt;
  std::optional<std::vector<double>> cv = vector_for(context_label);
  if (!cv.has_value()) return std::nullopt;
  return cosine(wv, *cv);
}

void EmbeddingTable::save(std::ostream& out) const {
  out << tokens_.size() << ' ' << dim_ << '\n';
  std::vector<const std::string*> order;
  order.reserve(tokens_.size());
  for (const std::string& token : tokens_) order.push_back(&token);
  std::sort(order.begin(), order.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* token : order) {
    std::span<const double> v = find(*token);
    out << *token;
    for (double x : v) out << ' ' << util::format_double(x);
    out << '\n';
  }
}

void EmbeddingTable::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open embeddings file for writing: " + path);
  save(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing embeddings file: " + path);
}

double EmbeddingTable::cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine requires vectors of equal dimension");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace visrank
