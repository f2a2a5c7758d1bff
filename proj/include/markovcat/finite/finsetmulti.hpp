#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "markovcat/finite/independence.hpp"
#include "markovcat/finite/kernel.hpp"

namespace markovcat {

/// Finite sets and entire multivalued maps (possibilistic nondeterminism).
struct FinSetMulti : finite::FiniteOps<finite::BooleanSemiring, FinSetMulti> {
  static constexpr const char* name = "finsetmulti";

  static constexpr double default_tolerance() { return 0.0; }

  /// A conditional copies the joint verbatim; an all-false branch becomes the
  /// full set.
  static void normalize_column(std::vector<std::uint8_t>& col) {
    for (auto v : col)
      if (v) return;
    std::fill(col.begin(), col.end(), std::uint8_t{1});
  }

  static Morphism normalize(const Morphism& f) { return f; }
};

using MultiKernel = FinSetMulti::Morphism;

namespace finsetmulti {

/// Largest base cardinality for which power objects are built.
inline constexpr std::size_t kPowerObjectCap = 16;

/// Wraps a boolean matrix (rows = target points, columns = source points),
/// checking entireness.
inline MultiKernel validate(const std::vector<std::vector<int>>& rows, const Object& source,
                            const Object& target) {
  if (rows.size() != target.cardinality())
    throw ValidationError("row count " + std::to_string(rows.size()) + " does not match target " +
                              target.to_string(),
                          rows.size(), 0);
  const std::size_t cols = source.cardinality();
  std::vector<std::uint8_t> data;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw ValidationError("row " + std::to_string(r) + " has wrong length", r, 0);
    for (std::size_t c = 0; c < cols; ++c) {
      if (rows[r][c] != 0 && rows[r][c] != 1)
        throw ValidationError("entry (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") is not boolean",
                              r, c);
      data.push_back(static_cast<std::uint8_t>(rows[r][c]));
    }
  }
  MultiKernel k(source, target, std::move(data));
  for (std::size_t c = 0; c < cols; ++c) {
    bool any = false;
    for (std::size_t r = 0; r < k.rows(); ++r) any = any || k(r, c);
    if (!any) throw ValidationError("column " + std::to_string(c) + " has no possible output", 0, c);
  }
  return k;
}

inline MultiKernel validate(const std::vector<std::vector<int>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  return validate(rows, Object{cols}, Object{rows.size()});
}

/// A possibility state: the nonempty subset `members` of {0..n-1}.
inline MultiKernel subset(std::size_t n, const std::vector<std::size_t>& members) {
  std::vector<std::vector<int>> rows(n, std::vector<int>(1, 0));
  for (auto m : members) rows.at(m)[0] = 1;
  return validate(rows, Object::unit(), Object{n});
}

/// Members of a possibility state.
inline std::vector<std::size_t> members(const MultiKernel& state) {
  if (!state.source().is_unit()) throw DomainError("members: expects a state");
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < state.rows(); ++r)
    if (state(r, 0)) out.push_back(r);
  return out;
}

/// Conditional f_{|Y}(x|y,a) = f(x,y|a), full set on impossible branches.
inline MultiKernel condition(const MultiKernel& joint, const OutputPartition& part) {
  return FinSetMulti::conditional(joint, part);
}

/// The distribution object PX = 2^X \ {∅}: nonempty subsets enumerated by
/// ascending bitmask, so point i is the subset with mask i + 1.
class PowerObject {
 public:
  explicit PowerObject(std::size_t base) : base_(base) {
    if (base == 0) throw DomainError("power object of the empty set");
    if (base > kPowerObjectCap)
      throw ResourceError("power object base " + std::to_string(base) + " exceeds cap " +
                          std::to_string(kPowerObjectCap));
  }

  std::size_t base() const noexcept { return base_; }
  std::size_t size() const noexcept { return (std::size_t{1} << base_) - 1; }
  Object object() const { return Object{size()}; }
  Object base_object() const { return Object{base_}; }

  static std::uint32_t mask_of(std::size_t index) { return static_cast<std::uint32_t>(index + 1); }
  static std::size_t index_of(std::uint32_t mask) {
    if (mask == 0) throw DomainError("the empty set is not in the power object");
    return static_cast<std::size_t>(mask) - 1;
  }

  /// samp : PX → X, sending a subset to any of its members.
  MultiKernel samp() const {
    MultiKernel k(object(), base_object());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto mask = mask_of(i);
      for (std::size_t x = 0; x < base_; ++x)
        if (mask & (1u << x)) k.at(x, i) = 1;
    }
    return k;
  }

 private:
  std::size_t base_;
};

/// Deterministic counterpart f♯ : A → PY of f : A → Y (single-factor
/// target), sending a to the subset of possible outputs.
inline MultiKernel sharp(const MultiKernel& f) {
  if (f.target().rank() != 1) throw DomainError("sharp: expects a single-factor target");
  const PowerObject py(f.target().factor(0));
  MultiKernel out(f.source(), py.object());
  for (std::size_t a = 0; a < f.cols(); ++a) {
    std::uint32_t mask = 0;
    for (std::size_t y = 0; y < f.rows(); ++y)
      if (f(y, a)) mask |= 1u << y;
    out.at(PowerObject::index_of(mask), a) = 1;
  }
  return out;
}

/// Subset of PY's base named by a point of PY.
inline std::vector<std::size_t> subset_of(std::size_t power_index) {
  std::vector<std::size_t> out;
  const auto mask = PowerObject::mask_of(power_index);
  for (std::size_t x = 0; x < 32; ++x)
    if (mask & (1u << x)) out.push_back(x);
  return out;
}

}  // namespace finsetmulti
}  // namespace markovcat
