#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "markovcat/finite/finsetmulti.hpp"
#include "markovcat/finite/finstoch.hpp"
#include "markovcat/gauss/gauss.hpp"
#include "markovcat/models.hpp"

namespace markovcat {

/// A sampled hidden trajectory x_0..x_k with its observations y_0..y_k.
template <MarkovCategory C>
struct Trajectory {
  std::vector<PointOf<C>> states;
  std::vector<PointOf<C>> observations;
};

namespace detail {

inline void check_steps(std::size_t steps, std::size_t horizon) {
  if (steps > horizon) throw DomainError("cannot simulate " + std::to_string(steps) + " steps, horizon is " + std::to_string(horizon));
}

/// Uniform choice among the possible outputs of column `col`.
inline std::size_t pick_possible(const MultiKernel& f, std::size_t col, std::mt19937_64& rng) {
  std::vector<std::size_t> options;
  for (std::size_t r = 0; r < f.rows(); ++r)
    if (f(r, col)) options.push_back(r);
  return options[static_cast<std::size_t>(rng() % options.size())];
}

}  // namespace detail

/// Samples x_0 ~ f_0, y_t ~ g_t(x_t), x_{t+1} ~ f_{t+1}(x_t) for t ≤ steps.
inline Trajectory<FinStoch> simulate(const HmmSpec<FinStoch>& hmm, std::size_t steps, std::mt19937_64& rng) {
  detail::check_steps(steps, hmm.horizon());
  Trajectory<FinStoch> out;
  std::size_t x = 0;
  for (std::size_t t = 0; t <= steps; ++t) {
    x = finstoch::sample_column(hmm.transition(t), t == 0 ? 0 : x, rng);
    out.states.push_back({x});
    out.observations.push_back({finstoch::sample_column(hmm.observation(t), x, rng)});
  }
  return out;
}

/// Possibilistic models have no probabilities; successors and observations
/// are drawn uniformly among the possible ones.
inline Trajectory<FinSetMulti> simulate(const HmmSpec<FinSetMulti>& hmm, std::size_t steps, std::mt19937_64& rng) {
  detail::check_steps(steps, hmm.horizon());
  Trajectory<FinSetMulti> out;
  std::size_t x = 0;
  for (std::size_t t = 0; t <= steps; ++t) {
    x = detail::pick_possible(hmm.transition(t), t == 0 ? 0 : x, rng);
    out.states.push_back({x});
    out.observations.push_back({detail::pick_possible(hmm.observation(t), x, rng)});
  }
  return out;
}

inline Trajectory<Gauss> simulate(const HmmSpec<Gauss>& hmm, std::size_t steps, std::mt19937_64& rng) {
  detail::check_steps(steps, hmm.horizon());
  Trajectory<Gauss> out;
  gauss::Vector x = gauss::sample(hmm.transition(0), rng);
  for (std::size_t t = 0; t <= steps; ++t) {
    if (t > 0) x = gauss::sample_at(hmm.transition(t), x, rng);
    out.states.push_back(x);
    out.observations.push_back(gauss::sample_at(hmm.observation(t), x, rng));
  }
  return out;
}

template <MarkovCategory C>
Trajectory<C> simulate(const HmmSpec<C>& hmm, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate(hmm, steps, rng);
}

}  // namespace markovcat
