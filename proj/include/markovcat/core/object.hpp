#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "markovcat/core/errors.hpp"

namespace markovcat {

/// An object of a Markov category, described as an ordered list of tensor
/// factors. For finite instances each factor is a cardinality; for Gauss it
/// is a dimension. The empty list is the monoidal unit I.
class Object {
 public:
  Object() = default;
  explicit Object(std::vector<std::size_t> factors) : factors_(std::move(factors)) {}
  Object(std::initializer_list<std::size_t> factors) : factors_(factors) {}

  static Object unit() { return Object{}; }

  std::size_t rank() const noexcept { return factors_.size(); }
  bool is_unit() const noexcept { return factors_.empty(); }
  std::size_t factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<std::size_t>& factors() const noexcept { return factors_; }

  /// Number of points of a finite object (1 for the unit).
  std::size_t cardinality() const {
    return std::accumulate(factors_.begin(), factors_.end(), std::size_t{1},
                           std::multiplies<>{});
  }

  /// Total dimension of a Gaussian object (0 for the unit).
  std::size_t dimension() const {
    return std::accumulate(factors_.begin(), factors_.end(), std::size_t{0});
  }

  /// Sub-object made of the selected factors, in the given order.
  Object select(std::span<const std::size_t> indices) const {
    std::vector<std::size_t> out;
    out.reserve(indices.size());
    for (auto i : indices) {
      if (i >= factors_.size()) throw DomainError("factor index out of range");
      out.push_back(factors_[i]);
    }
    return Object(std::move(out));
  }

  friend Object operator*(const Object& a, const Object& b) {
    std::vector<std::size_t> out = a.factors_;
    out.insert(out.end(), b.factors_.begin(), b.factors_.end());
    return Object(std::move(out));
  }

  friend bool operator==(const Object&, const Object&) = default;

  std::string to_string() const {
    if (factors_.empty()) return "I";
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(factors_[i]);
    }
    return s;
  }

 private:
  std::vector<std::size_t> factors_;
};

/// Split of a morphism's output factors into the kept outputs X and the
/// conditioned outputs Y. Both lists are ordered; together they must cover
/// every output factor exactly once.
struct OutputPartition {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> conditioned;

  void validate(std::size_t rank) const {
    std::vector<int> seen(rank, 0);
    auto mark = [&](std::size_t i) {
      if (i >= rank) throw DomainError("partition index out of range");
      if (seen[i]++) throw DomainError("partition index repeated");
    };
    for (auto i : kept) mark(i);
    for (auto i : conditioned) mark(i);
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s == 0; }))
      throw DomainError("partition does not cover all output factors");
  }

  std::vector<std::size_t> order() const {
    std::vector<std::size_t> out = kept;
    out.insert(out.end(), conditioned.begin(), conditioned.end());
    return out;
  }
};

/// [first, last) as an index list.
inline std::vector<std::size_t> index_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t i = first; i < last; ++i) out.push_back(i);
  return out;
}

/// Checks that `indices` has no repeats and stays below `rank`.
inline void check_distinct(std::span<const std::size_t> indices, std::size_t rank) {
  std::vector<char> seen(rank, 0);
  for (auto i : indices) {
    if (i >= rank) throw DomainError("factor index out of range");
    if (seen[i]++) throw DomainError("factor index repeated");
  }
}

}  // namespace markovcat
