#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "markovcat/finite/independence.hpp"
#include "markovcat/finite/kernel.hpp"

namespace markovcat {

/// Finite sets and stochastic matrices.
struct FinStoch : finite::FiniteOps<finite::ProbabilitySemiring, FinStoch> {
  static constexpr const char* name = "finstoch";

  static constexpr double default_tolerance() { return 1e-12; }

    /// Division by the column mass; a zero column becomes uniform.
  static void normalize_column(std::vector<double>& col) {
    double mass = 0.0;
    for (double v : col) mass += v;
    if (mass == 0.0) {
      std::fill(col.begin(), col.end(), 1.0 / static_cast<double>(col.size()));
      return;
    }
    for (double& v : col) v /= mass;
  }

  /// Rescales every column to unit mass (guards against round-off drift).
  static Morphism normalize(const Morphism& f) {
    Morphism out = f;
    for (std::size_t c = 0; c < f.cols(); ++c) {
      auto col = f.column(c);
      normalize_column(col);
      for (std::size_t r = 0; r < f.rows(); ++r) out.at(r, c) = col[r];
    }
    return out;
  }
};

using StochasticKernel = FinStoch::Morphism;

namespace finstoch {

/// Checks a raw row-major matrix (rows = target points, columns = source
/// points) and wraps it as a kernel between the given objects.
inline StochasticKernel validate(const std::vector<std::vector<double>>& rows, const Object& source,
                                 const Object& target, double tol = 1e-12) {
  if (rows.size() != target.cardinality())
    throw ValidationError("row count " + std::to_string(rows.size()) + " does not match target " +
                              target.to_string(),
                          rows.size(), 0);
  const std::size_t cols = source.cardinality();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw ValidationError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                " entries, expected " + std::to_string(cols),
                            r, 0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = rows[r][c];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ValidationError("entry (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") is not a probability",
                              r, c);
      data.push_back(v);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) sum += rows[r][c];
    if (std::abs(sum - 1.0) > tol)
      throw ValidationError("column " + std::to_string(c) + " sums to " + std::to_string(sum), 0, c);
  }
  return StochasticKernel(source, target, std::move(data));
}

/// Single-factor convenience form: source = {columns}, target = {rows}.
inline StochasticKernel validate(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  return validate(rows, Object{cols}, Object{rows.size()});
}

/// A distribution on a single finite factor.
inline StochasticKernel distribution(const std::vector<double>& p) {
  std::vector<std::vector<double>> rows;
  for (double v : p) rows.push_back({v});
  return validate(rows, Object::unit(), Object{p.size()});
}

/// The conditional f(x,y|a)/f(y|a), uniform where f(y|a) = 0.
inline StochasticKernel condition(const StochasticKernel& joint, const OutputPartition& part) {
  return FinStoch::conditional(joint, part);
}

/// Whether a state on X ⊗ Y ⊗ Z displays X ⊥ Z | Y.
inline bool ci_holds(const StochasticKernel& p, double tol = 1e-12) {
  return finite::ci_holds(p, tol);
}

/// Inverse-CDF draw from column `col` of f using the supplied generator.
inline std::size_t sample_column(const StochasticKernel& f, std::size_t col, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    const double w = f(r, col);
    if (w <= 0.0) continue;
    last_positive = r;
    acc += w;
    if (u < acc) return r;
  }
  return last_positive;
}

inline std::size_t sample(const StochasticKernel& d, std::mt19937_64& rng) {
  if (!d.source().is_unit()) throw DomainError("sample: expects a distribution");
  return sample_column(d, 0, rng);
}

inline std::size_t sample(const StochasticKernel& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample(d, rng);
}

}  // namespace finstoch
}  // namespace markovcat
