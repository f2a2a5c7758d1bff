#pragma once

// Seeded random instances and brute-force oracles shared by the unit and
// acceptance tests.

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "markovcat/markovcat.hpp"

namespace markovcat::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Object with 1..max_rank factors each of size 1..max_size (finite) or
/// dimension 1..max_size (Gauss).
inline Object random_object(Rng& rng, std::size_t max_rank, std::size_t max_size, std::size_t min_rank = 1) {
  std::vector<std::size_t> f(uniform_int(rng, min_rank, max_rank));
  for (auto& v : f) v = uniform_int(rng, 1, max_size);
  return Object(std::move(f));
}

/// Stochastic kernel with roughly `sparsity` of its entries zeroed; every
/// column keeps at least one positive entry.
inline StochasticKernel random_stochastic(Rng& rng, const Object& source, const Object& target, double sparsity = 0.3) {
  StochasticKernel k(source, target);
  for (std::size_t c = 0; c < k.cols(); ++c) {
    double mass = 0.0;
    for (std::size_t r = 0; r < k.rows(); ++r) {
      const double v = uniform_real(rng) < sparsity ? 0.0 : uniform_real(rng, 0.05, 1.0);
      k.at(r, c) = v;
      mass += v;
    }
    if (mass == 0.0) {
      const auto r = uniform_int(rng, 0, k.rows() - 1);
      k.at(r, c) = 1.0;
      mass = 1.0;
    }
    for (std::size_t r = 0; r < k.rows(); ++r) k.at(r, c) /= mass;
  }
  return k;
}

/// Relation with every source related to at least one target.
inline MultiKernel random_relation(Rng& rng, const Object& source, const Object& target, double density = 0.5) {
  MultiKernel k(source, target);
  for (std::size_t c = 0; c < k.cols(); ++c) {
    bool any = false;
    for (std::size_t r = 0; r < k.rows(); ++r) {
      const bool on = uniform_real(rng) < density;
      k.at(r, c) = on;
      any = any || on;
    }
    if (!any) k.at(uniform_int(rng, 0, k.rows() - 1), c) = 1;
  }
  return k;
}

template <class C>
MorphismOf<C> random_finite(Rng& rng, const Object& source, const Object& target) {
  if constexpr (std::is_same_v<C, FinStoch>)
    return random_stochastic(rng, source, target);
  else
    return random_relation(rng, source, target);
}

/// A deterministic finite kernel: a random function.
template <class C>
MorphismOf<C> random_function(Rng& rng, const Object& source, const Object& target) {
  MorphismOf<C> k(source, target);
  for (std::size_t c = 0; c < k.cols(); ++c) k.at(uniform_int(rng, 0, k.rows() - 1), c) = 1;
  return k;
}

inline gauss::Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  gauss::Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

/// PSD matrix of random rank in [min_rank, d].
inline gauss::Matrix random_covariance(Rng& rng, Eigen::Index d, Eigen::Index min_rank = 0) {
  const auto rank = static_cast<Eigen::Index>(uniform_int(rng, static_cast<std::size_t>(std::min(min_rank, d)),
                                                          static_cast<std::size_t>(d)));
  const gauss::Matrix l = random_matrix(rng, d, rank);
  gauss::Matrix c = l * l.transpose();
  return 0.5 * (c + c.transpose());
}

inline gauss::GaussMap random_gauss(Rng& rng, const Object& source, const Object& target, Eigen::Index min_rank = 0) {
  const auto n = static_cast<Eigen::Index>(source.dimension());
  const auto m = static_cast<Eigen::Index>(target.dimension());
  return gauss::GaussMap(source, target, random_matrix(rng, m, n), random_matrix(rng, m, 1).col(0),
                         random_covariance(rng, m, min_rank));
}

/// Noise-free affine map, hence deterministic.
inline gauss::GaussMap random_gauss_function(Rng& rng, const Object& source, const Object& target) {
  const auto n = static_cast<Eigen::Index>(source.dimension());
  const auto m = static_cast<Eigen::Index>(target.dimension());
  return gauss::GaussMap(source, target, random_matrix(rng, m, n), random_matrix(rng, m, 1).col(0),
                         gauss::Matrix::Zero(m, m));
}

template <class C>
MorphismOf<C> random_morphism(Rng& rng, const Object& source, const Object& target) {
  if constexpr (std::is_same_v<C, Gauss>)
    return random_gauss(rng, source, target);
  else
    return random_finite<C>(rng, source, target);
}

template <class C>
MorphismOf<C> random_deterministic(Rng& rng, const Object& source, const Object& target) {
  if constexpr (std::is_same_v<C, Gauss>)
    return random_gauss_function(rng, source, target);
  else
    return random_function<C>(rng, source, target);
}

/// HMM with constant state and observation sizes.
template <class C>
HmmSpec<C> random_hmm(Rng& rng, std::size_t n, std::size_t xs, std::size_t ys) {
  HmmSpec<C> hmm;
  const Object x{xs}, y{ys};
  hmm.chain.kernels.push_back(random_finite<C>(rng, Object::unit(), x));
  for (std::size_t t = 1; t <= n; ++t) hmm.chain.kernels.push_back(random_finite<C>(rng, x, x));
  for (std::size_t t = 0; t <= n; ++t) hmm.observations.push_back(random_finite<C>(rng, x, y));
  return hmm;
}

/// Linear-Gaussian model with time-varying offsets; transitions are scaled
/// to spectral norm below 1 so long runs stay bounded. Process noise has
/// rank at least `min_noise_rank`.
inline HmmSpec<Gauss> random_linear_gaussian(Rng& rng, std::size_t n, Eigen::Index dx, Eigen::Index dy,
                                             Eigen::Index min_noise_rank = 0) {
  HmmSpec<Gauss> hmm;
  hmm.chain.kernels.push_back(gauss::GaussMap::state(random_matrix(rng, dx, 1).col(0), random_covariance(rng, dx, dx)));
  for (std::size_t t = 1; t <= n; ++t) {
    gauss::Matrix a = random_matrix(rng, dx, dx);
    const double norm = a.operatorNorm();
    if (norm > 0.95) a *= 0.95 / norm;
    hmm.chain.kernels.push_back(gauss::GaussMap::affine(a, random_matrix(rng, dx, 1).col(0), random_covariance(rng, dx, min_noise_rank)));
  }
  for (std::size_t t = 0; t <= n; ++t)
    hmm.observations.push_back(
        gauss::GaussMap::affine(random_matrix(rng, dy, dx), random_matrix(rng, dy, 1).col(0), random_covariance(rng, dy, dy)));
  return hmm;
}

/// All observation sequences y_0..y_n over constant single-factor spaces.
inline std::vector<std::vector<std::vector<std::size_t>>> all_sequences(std::size_t n, std::size_t ys) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::size_t> digits(n + 1, 0);
  while (true) {
    std::vector<std::vector<std::size_t>> seq;
    for (auto d : digits) seq.push_back({d});
    out.push_back(std::move(seq));
    std::size_t i = n + 1;
    while (i > 0 && ++digits[i - 1] == ys) digits[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

/// Possibilistic posterior by depth-first enumeration of state paths
/// consistent with y_0..y_t. Entry t is the set of reachable end states.
inline std::vector<std::set<std::size_t>> path_posteriors(const HmmSpec<FinSetMulti>& hmm,
                                                          const std::vector<std::size_t>& ys) {
  std::vector<std::set<std::size_t>> out(ys.size());
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t t, std::size_t x) {
    if (!hmm.observation(t)(ys[t], x)) return;
    out[t].insert(x);
    if (t + 1 == ys.size()) return;
    const auto& f = hmm.transition(t + 1);
    for (std::size_t next = 0; next < f.rows(); ++next)
      if (f(next, x)) visit(t + 1, next);
  };
  const auto& f0 = hmm.transition(0);
  for (std::size_t x = 0; x < f0.rows(); ++x)
    if (f0(x, 0)) visit(0, x);
  return out;
}

/// A second conditional of f w.r.t. part that differs from the library's
/// choice wherever the conditioned outputs have zero mass.
template <class C>
MorphismOf<C> alternative_conditional(Rng& rng, const MorphismOf<C>& f, const OutputPartition& part) {
  auto c = C::conditional(f, part);
  if constexpr (std::is_same_v<C, Gauss>) {
    const auto yr = gauss::factor_rows(f.target(), part.conditioned);
    const gauss::Matrix n = gauss::take_rows(f.matrix(), yr);
    const gauss::Vector t = gauss::take(f.mean(), yr);
    const gauss::Matrix cyy = gauss::take_block(f.cov(), yr, yr);
    const auto dy = cyy.rows();
    const gauss::Matrix null_proj = gauss::Matrix::Identity(dy, dy) - cyy * gauss::pinv(cyy);
    const gauss::Matrix d = random_matrix(rng, c.mean().size(), dy) * null_proj;
    const auto da = n.cols();
    gauss::Matrix a = c.matrix();
    a.leftCols(da) -= d * n;
    a.rightCols(dy) += d;
    return gauss::GaussMap(c.source(), c.target(), a, c.mean() - d * t, c.cov());
  } else {
    const auto m = C::marginal(f, part.conditioned);
    const std::size_t ny = m.rows();
    for (std::size_t col = 0; col < c.cols(); ++col) {
      const std::size_t a = col / ny, y = col % ny;
      if (m(y, a) != 0) continue;
      const auto fresh = random_finite<C>(rng, Object::unit(), C::target(c));
      for (std::size_t r = 0; r < c.rows(); ++r) c.at(r, col) = fresh(r, 0);
    }
    return c;
  }
}

/// Stationary distribution of an irreducible stochastic matrix by power
/// iteration.
inline StochasticKernel stationary(const StochasticKernel& f) {
  const std::size_t n = f.rows();
  gauss::Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f(r, c);
  gauss::Vector v = gauss::Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  for (int i = 0; i < 100000; ++i) {
    gauss::Vector next = p * v;
    next /= next.sum();
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-17) break;
  }
  std::vector<double> values(v.data(), v.data() + v.size());
  return finite::state_from<finite::ProbabilitySemiring>(Object{n}, values);
}

/// Reversible chain from a random symmetric weight matrix, with its
/// stationary distribution.
inline std::pair<StochasticKernel, StochasticKernel> random_reversible(Rng& rng, std::size_t n) {
  std::vector<double> w(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) w[i * n + j] = w[j * n + i] = uniform_real(rng, 0.1, 1.0);
  StochasticKernel f(Object{n}, Object{n});
  std::vector<double> pi(n, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double mass = 0.0;
    for (std::size_t r = 0; r < n; ++r) mass += w[r * n + c];
    for (std::size_t r = 0; r < n; ++r) f.at(r, c) = w[r * n + c] / mass;
    pi[c] = mass;
    total += mass;
  }
  for (auto& v : pi) v /= total;
  return {f, finite::state_from<finite::ProbabilitySemiring>(Object{n}, pi)};
}

/// Mixes a joint state with a random one: (1 − eps) p + eps r.
inline StochasticKernel perturb(Rng& rng, const StochasticKernel& p, double eps) {
  const auto r = random_stochastic(rng, Object::unit(), p.target(), 0.0);
  StochasticKernel out = p;
  for (std::size_t i = 0; i < p.rows(); ++i) out.at(i, 0) = (1.0 - eps) * p(i, 0) + eps * r(i, 0);
  return out;
}

}  // namespace markovcat::testing
