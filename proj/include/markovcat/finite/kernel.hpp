#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "markovcat/core/category.hpp"

namespace markovcat::finite {

/// Real arithmetic for stochastic matrices.
struct ProbabilitySemiring {
  using value_type = double;
  static constexpr value_type zero() { return 0.0; }
  static constexpr value_type one() { return 1.0; }
  static constexpr value_type add(value_type a, value_type b) { return a + b; }
  static constexpr value_type mul(value_type a, value_type b) { return a * b; }
  static constexpr bool is_zero(value_type a) { return a == 0.0; }
  static constexpr bool exact = false;
};

/// Boolean arithmetic with the saturating convention 1 + 1 = 1.
struct BooleanSemiring {
  using value_type = std::uint8_t;
  static constexpr value_type zero() { return 0; }
  static constexpr value_type one() { return 1; }
  static constexpr value_type add(value_type a, value_type b) { return a | b; }
  static constexpr value_type mul(value_type a, value_type b) { return a & b; }
  static constexpr bool is_zero(value_type a) { return a == 0; }
  static constexpr bool exact = true;
};

/// Row-major flat index of a multi-index over `shape` (first factor slowest).
inline std::size_t flatten(const Object& shape, std::span<const std::size_t> idx) {
  if (idx.size() != shape.rank()) throw DomainError("point rank does not match object");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= shape.factor(i)) throw DomainError("point coordinate out of range");
    flat = flat * shape.factor(i) + idx[i];
  }
  return flat;
}

inline std::vector<std::size_t> unflatten(const Object& shape, std::size_t flat) {
  std::vector<std::size_t> idx(shape.rank());
  for (std::size_t i = shape.rank(); i-- > 0;) {
    idx[i] = flat % shape.factor(i);
    flat /= shape.factor(i);
  }
  return idx;
}

/// For each flat index of `shape`, the flat index of its projection onto the
/// factors `keep` (in that order).
inline std::vector<std::size_t> projection_map(const Object& shape,
                                               std::span<const std::size_t> keep) {
  const Object sub = shape.select(keep);
  const std::size_t n = shape.cardinality();
  std::vector<std::size_t> out(n);
  std::vector<std::size_t> idx(shape.rank(), 0);
  std::vector<std::size_t> sub_idx(keep.size());
  for (std::size_t flat = 0; flat < n; ++flat) {
    for (std::size_t k = 0; k < keep.size(); ++k) sub_idx[k] = idx[keep[k]];
    out[flat] = sub.rank() ? flatten(sub, sub_idx) : 0;
    for (std::size_t i = shape.rank(); i-- > 0;) {
      if (++idx[i] < shape.factor(i)) break;
      idx[i] = 0;
    }
  }
  return out;
}

/// A finite kernel f(y|x) stored densely: rows index the target, columns the
/// source. Used with the probability semiring (FinStoch) and the boolean
/// semiring (FinSetMulti).
template <class S>
class Kernel {
 public:
  using semiring = S;
  using value_type = typename S::value_type;

  Kernel() = default;
  Kernel(Object source, Object target)
      : source_(std::move(source)),
        target_(std::move(target)),
        rows_(target_.cardinality()),
        cols_(source_.cardinality()),
        data_(rows_ * cols_, S::zero()) {}
  Kernel(Object source, Object target, std::vector<value_type> data)
      : source_(std::move(source)),
        target_(std::move(target)),
        rows_(target_.cardinality()),
        cols_(source_.cardinality()),
        data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DomainError("kernel data size mismatch");
  }

  const Object& source() const noexcept { return source_; }
  const Object& target() const noexcept { return target_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  value_type operator()(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }
  value_type& at(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
  const std::vector<value_type>& data() const noexcept { return data_; }

  /// Column `col` as a vector over the target.
  std::vector<value_type> column(std::size_t col) const {
    std::vector<value_type> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, col);
    return out;
  }

  /// Only for states: entries over the target.
  std::vector<value_type> vector() const {
    if (cols_ != 1) throw DomainError("not a state");
    return data_;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  Object source_;
  Object target_;
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  std::vector<value_type> data_ = {S::one()};
};

template <class S>
Kernel<S> state_from(const Object& target, std::vector<typename S::value_type> values) {
  return Kernel<S>(Object::unit(), target, std::move(values));
}

/// Operations shared by both finite instances; the concrete instance adds its
/// conditional fallback and tolerance.
template <class S, class Derived>
struct FiniteOps {
  using Morphism = Kernel<S>;
  using Point = std::vector<std::size_t>;
  using value_type = typename S::value_type;

  /// Joint-state entry cap for brute-force oracle constructions.
  static constexpr std::size_t kOracleCap = 1'000'000;

  static Object source(const Morphism& f) { return f.source(); }
  static Object target(const Morphism& f) { return f.target(); }

  static Morphism identity(const Object& x) {
    Morphism out(x, x);
    for (std::size_t i = 0; i < x.cardinality(); ++i) out.at(i, i) = S::one();
    return out;
  }

  static Morphism copy(const Object& x) {
    const std::size_t n = x.cardinality();
    Morphism out(x, x * x);
    for (std::size_t i = 0; i < n; ++i) out.at(i * n + i, i) = S::one();
    return out;
  }

  static Morphism discard(const Object& x) {
    Morphism out(x, Object::unit());
    for (std::size_t i = 0; i < x.cardinality(); ++i) out.at(0, i) = S::one();
    return out;
  }

  static Morphism swap(const Object& x, const Object& y) {
    const std::size_t nx = x.cardinality(), ny = y.cardinality();
    Morphism out(x * y, y * x);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) out.at(j * nx + i, i * ny + j) = S::one();
    return out;
  }

  static Morphism compose(const Morphism& f, const Morphism& g) {
    if (f.target() != g.source())
      throw DomainError("compose: target " + f.target().to_string() + " does not match source " +
                        g.source().to_string());
    Morphism out(f.source(), g.target());
    const std::size_t na = f.cols(), nb = f.rows(), nc = g.rows();
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const value_type w = f(b, a);
        if (S::is_zero(w)) continue;
        for (std::size_t c = 0; c < nc; ++c) {
          const value_type v = g(c, b);
          if (S::is_zero(v)) continue;
          out.at(c, a) = S::add(out(c, a), S::mul(v, w));
        }
      }
    return out;
  }

  static Morphism tensor(const Morphism& f, const Morphism& g) {
    Morphism out(f.source() * g.source(), f.target() * g.target());
    const std::size_t gr = g.rows(), gc = g.cols();
    for (std::size_t r1 = 0; r1 < f.rows(); ++r1)
      for (std::size_t c1 = 0; c1 < f.cols(); ++c1) {
        const value_type w = f(r1, c1);
        if (S::is_zero(w)) continue;
        for (std::size_t r2 = 0; r2 < gr; ++r2)
          for (std::size_t c2 = 0; c2 < gc; ++c2)
            out.at(r1 * gr + r2, c1 * gc + c2) = S::mul(w, g(r2, c2));
      }
    return out;
  }

  /// Keeps the output factors `keep` in the given order, summing out the rest.
  static Morphism marginal(const Morphism& f, std::span<const std::size_t> keep) {
    check_distinct(keep, f.target().rank());
    const auto proj = projection_map(f.target(), keep);
    Morphism out(f.source(), f.target().select(keep));
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 0; c < f.cols(); ++c) {
        const value_type w = f(r, c);
        if (!S::is_zero(w)) out.at(proj[r], c) = S::add(out(proj[r], c), w);
      }
    return out;
  }

  static Morphism branch(const Morphism& f, std::span<const std::size_t> idx, const Morphism& k) {
    check_distinct(idx, f.target().rank());
    if (f.target().select(idx) != k.source())
      throw DomainError("branch: selected outputs " + f.target().select(idx).to_string() +
                        " do not match kernel source " + k.source().to_string());
    const auto proj = projection_map(f.target(), idx);
    Morphism out(f.source(), f.target() * k.target());
    const std::size_t nz = k.rows();
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 0; c < f.cols(); ++c) {
        const value_type w = f(r, c);
        if (S::is_zero(w)) continue;
        for (std::size_t z = 0; z < nz; ++z) out.at(r * nz + z, c) = S::mul(w, k(z, proj[r]));
      }
    return out;
  }

  /// Conditional of f : A → T w.r.t. the outputs part.conditioned, with type
  /// A ⊗ Y → X. Branches whose conditioning weight vanishes get the
  /// instance's fallback column.
  static Morphism conditional(const Morphism& f, const OutputPartition& part) {
    part.validate(f.target().rank());
    const Morphism joint = marginal(f, part.order());
    const Object x = f.target().select(part.kept);
    const Object y = f.target().select(part.conditioned);
    const std::size_t nx = x.cardinality(), ny = y.cardinality(), na = f.cols();
    Morphism out(f.source() * y, x);
    std::vector<value_type> col(nx);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t yi = 0; yi < ny; ++yi) {
        for (std::size_t xi = 0; xi < nx; ++xi) col[xi] = joint(xi * ny + yi, a);
        Derived::normalize_column(col);
        for (std::size_t xi = 0; xi < nx; ++xi) out.at(xi, a * ny + yi) = col[xi];
      }
    return out;
  }

  static Morphism point(const Object& x, const Point& p) {
    Morphism out(Object::unit(), x);
    out.at(flatten(x, p), 0) = S::one();
    return out;
  }

  /// Probability (or possibility, 0/1) that the state f puts on p.
  static double weight(const Morphism& f, const Point& p) {
    if (!f.source().is_unit()) throw DomainError("weight: expects a state");
    return static_cast<double>(f(flatten(f.target(), p), 0));
  }

  static double deviation(const Morphism& f, const Morphism& g) {
    if (f.source() != g.source() || f.target() != g.target())
      throw DomainError("deviation: morphisms are not parallel");
    double worst = 0.0;
    for (std::size_t i = 0; i < f.data().size(); ++i)
      worst = std::max(worst, std::abs(static_cast<double>(f.data()[i]) -
                                       static_cast<double>(g.data()[i])));
    return worst;
  }

  static void check_oracle_cap(const Object& x) {
    double entries = 1.0;
    for (auto n : x.factors()) entries *= static_cast<double>(n);
    if (entries > static_cast<double>(kOracleCap))
      throw ResourceError("joint over " + x.to_string() + " exceeds the oracle cap of " +
                          std::to_string(kOracleCap) + " entries");
  }
};

}  // namespace markovcat::finite

namespace markovcat {

/// Concatenates per-factor points into one point of the product object.
inline std::vector<std::size_t> join_points(const std::vector<std::vector<std::size_t>>& parts) {
  std::vector<std::size_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace markovcat
