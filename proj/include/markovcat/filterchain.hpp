#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "markovcat/filtering.hpp"

namespace markovcat::filterchain {

/// Largest state space for which power-object constructions are attempted.
inline constexpr std::size_t kStateCap = 8;

/// Outcome of checking that the filter process is a Markov chain.
struct FilterChainReport {
  std::string instance;
  std::size_t horizon = 0;
  double theorem_deviation = 0.0;  // filter process vs chain generated by h_0..h_n
  double lambda_defect = 0.0;      // coherence of λ_t with B_t♯
  double obs_joint_defect = 0.0;   // observation process rebuilt through the filter
  double update_defect = 0.0;      // B_t♯ vs u_t♯ applied to (B_{t-1}♯, y_t)
  bool markov_local = true;        // filter-process joint passes chain-local
  std::vector<std::size_t> carrier_sizes;
  bool close_atoms = false;        // atlas atoms within 10× the dedup tolerance
  double tolerance = 0.0;

  bool passed() const {
    return theorem_deviation <= tolerance && lambda_defect <= tolerance && obs_joint_defect <= tolerance &&
           update_defect <= tolerance && markov_local;
  }
};

/// p^Y_[t]: the observation marginal of the HMM up to time t.
template <MarkovCategory C>
MorphismOf<C> observation_process(const HmmSpec<C>& hmm, std::size_t t) {
  std::vector<std::size_t> ys;
  for (std::size_t s = 0; s <= t; ++s) ys.push_back(y_factor(s));
  return C::marginal(hmm_joint(hmm.truncated(t)), ys);
}

/// Largest deviation between p^Y_[t+1] and p^Y_[t] branched with
/// g_{t+1} ∘ f_{t+1} ∘ B_t, over t = 0..n-1 (and p^Y_0 = g_0 f_0).
template <MarkovCategory C>
double obs_joint_defect(const HmmSpec<C>& hmm) {
  double worst = C::deviation(observation_process(hmm, 0),
                              C::compose(hmm.transition(0), hmm.observation(0)));
  for (std::size_t t = 0; t < hmm.horizon(); ++t) {
    const auto next = predictive_observation<C>(filter_recursive_kernel(hmm, t), hmm.transition(t + 1),
                                                hmm.observation(t + 1));
    const auto rebuilt = C::branch(observation_process(hmm, t), index_range(0, t + 1), next);
    worst = std::max(worst, C::deviation(observation_process(hmm, t + 1), rebuilt));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// FinSetMulti: genuine power objects

namespace detail {

inline void check_state_cap(const HmmSpec<FinSetMulti>& hmm) {
  for (std::size_t t = 0; t <= hmm.horizon(); ++t)
    if (hmm.state_space(t).cardinality() > kStateCap)
      throw ResourceError("state space X_" + std::to_string(t) + " has " +
                          std::to_string(hmm.state_space(t).cardinality()) +
                          " elements, power-object cap is " + std::to_string(kStateCap));
}

inline Object observation_prefix(const HmmSpec<FinSetMulti>& hmm, std::size_t t) {
  Object out;
  for (std::size_t s = 0; s <= t; ++s) out = out * hmm.observation_space(s);
  return out;
}

}  // namespace detail

/// u_t : PX_{t-1} ⊗ Y_t → X_t, the conditional on Y_t of
/// (id ⊗ g_t)∘copy∘f_t∘samp. u_0 = B_0 : Y_0 → X_0.
inline MultiKernel update_map(const HmmSpec<FinSetMulti>& hmm, std::size_t t) {
  detail::check_state_cap(hmm);
  if (t == 0) return bayes_inverse<FinSetMulti>(hmm.observation(0), hmm.transition(0));
  const finsetmulti::PowerObject px(hmm.state_space(t - 1).cardinality());
  const auto predicted = FinSetMulti::compose(px.samp(), hmm.transition(t));
  const std::size_t x[] = {0};
  return FinSetMulti::conditional(FinSetMulti::branch(predicted, x, hmm.observation(t)), OutputPartition{{0}, {1}});
}

/// h_t : PX_{t-1} → PX_t: sample a state, sample an observation, update the
/// original subset by it. h_0 = u_0♯ ∘ g_0 ∘ f_0.
inline MultiKernel filter_transition(const HmmSpec<FinSetMulti>& hmm, std::size_t t) {
  using M = FinSetMulti;
  const auto u_sharp = finsetmulti::sharp(update_map(hmm, t));
  if (t == 0) return M::compose(M::compose(hmm.transition(0), hmm.observation(0)), u_sharp);
  const finsetmulti::PowerObject px(hmm.state_space(t - 1).cardinality());
  const auto obs = M::compose(M::compose(px.samp(), hmm.transition(t)), hmm.observation(t));
  const std::size_t whole[] = {0};
  return M::compose(M::branch(M::identity(px.object()), whole, obs), u_sharp);
}

/// B_t♯ : Y_0 ⊗ ... ⊗ Y_t → PX_t.
inline MultiKernel filter_sharp(const HmmSpec<FinSetMulti>& hmm, std::size_t t) {
  return finsetmulti::sharp(filter_recursive_kernel<FinSetMulti>(hmm, t));
}

/// λ_t : Y_0 ⊗ ... ⊗ Y_t → PX_0 ⊗ ... ⊗ PX_t, the sequence of deterministic
/// filter posteriors along an observation prefix.
inline MultiKernel lambda(const HmmSpec<FinSetMulti>& hmm, std::size_t t) {
  using M = FinSetMulti;
  auto out = filter_sharp(hmm, 0);
  for (std::size_t s = 1; s <= t; ++s) {
    M::check_oracle_cap(M::target(out) * M::target(filter_sharp(hmm, s)));
    auto k = M::branch(M::identity(detail::observation_prefix(hmm, s)), index_range(0, s), out);
    k = M::branch(k, index_range(0, s + 1), filter_sharp(hmm, s));
    out = M::marginal(k, index_range(s + 1, 2 * s + 2));
  }
  return out;
}

/// Verifies the filter-process theorem and its lemmas exactly.
inline FilterChainReport verify_filter_markov(const HmmSpec<FinSetMulti>& hmm) {
  using M = FinSetMulti;
  hmm.validate();
  detail::check_state_cap(hmm);
  const std::size_t n = hmm.horizon();
  FilterChainReport report;
  report.instance = M::name;
  report.horizon = n;

  ChainSpec<M> chain;
  for (std::size_t t = 0; t <= n; ++t) {
    chain.kernels.push_back(filter_transition(hmm, t));
    report.carrier_sizes.push_back(M::target(chain.kernels.back()).cardinality());
  }
  const auto lam = lambda(hmm, n);
  const auto process = M::compose(observation_process(hmm, n), lam);
  const auto generated = chain_joint(chain);
  report.theorem_deviation = M::deviation(process, generated);

  for (std::size_t t = 0; t <= n; ++t) {
    const auto lt = lambda(hmm, t);
    const auto all = index_range(0, t + 1);
    auto lhs = M::branch(M::branch(M::identity(detail::observation_prefix(hmm, t)), all, lt), all,
                         filter_sharp(hmm, t));
    lhs = M::marginal(lhs, index_range(t + 1, 2 * t + 3));
    const std::size_t last[] = {t};
    const auto rhs = M::branch(lt, last, M::identity(M::target(filter_sharp(hmm, t))));
    report.lambda_defect = std::max(report.lambda_defect, M::deviation(lhs, rhs));
  }

  for (std::size_t t = 1; t <= n; ++t) {
    auto k = M::branch(M::identity(detail::observation_prefix(hmm, t)), index_range(0, t), filter_sharp(hmm, t - 1));
    const std::size_t order[] = {t + 1, t};
    const auto via_update = M::compose(M::marginal(k, order), finsetmulti::sharp(update_map(hmm, t)));
    report.update_defect = std::max(report.update_defect, M::deviation(via_update, filter_sharp(hmm, t)));
  }

  report.obs_joint_defect = obs_joint_defect(hmm);
  report.markov_local = check_markov_properties(process, MarkovProperty::ChainLocal, {.tolerance = 0.0}).all_passed();
  return report;
}

// ---------------------------------------------------------------------------
// FinStoch: reachable-posterior atlas

/// Distinct posteriors B_t(y_[t]) over all positive-probability prefixes.
struct PosteriorAtlas {
  double dedup_tolerance = 1e-9;
  std::vector<std::vector<std::vector<double>>> atoms;  // per t, sorted lexicographically
  std::vector<std::vector<double>> weights;             // per t, total prefix probability per atom
  bool close_atoms = false;

  /// Index of the atom within the dedup tolerance of `posterior`.
  std::size_t atom_of(std::size_t t, const std::vector<double>& posterior) const {
    for (std::size_t i = 0; i < atoms.at(t).size(); ++i)
      if (distance(atoms[t][i], posterior) <= dedup_tolerance) return i;
    throw DomainError("posterior at time " + std::to_string(t) + " is not in the atlas");
  }

  static double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  }
};

namespace detail {

/// Every positive-probability observation sequence y_[n] with its
/// probability and filter posteriors.
struct PrefixRecord {
  std::vector<std::size_t> observations;
  double probability = 0.0;
  std::vector<std::vector<double>> posteriors;
};

inline std::vector<PrefixRecord> enumerate_prefixes(const HmmSpec<FinStoch>& hmm) {
  const std::size_t n = hmm.horizon();
  Object ys;
  for (std::size_t t = 0; t <= n; ++t) ys = ys * hmm.observation_space(t);
  FinStoch::check_oracle_cap(ys);
  std::vector<PrefixRecord> out;
  for (std::size_t flat = 0; flat < ys.cardinality(); ++flat) {
    const auto y = finite::unflatten(ys, flat);
    std::vector<FinStoch::Point> obs;
    for (auto v : y) obs.push_back({v});
    PrefixRecord rec{y, 1.0, {}};
    auto previous = hmm.transition(0);
    for (std::size_t t = 0; t <= n && rec.probability > 0.0; ++t) {
      const auto step = t == 0 ? filter_update<FinStoch>(previous, hmm.observation(0), obs[0])
                               : filter_step<FinStoch>(previous, hmm.transition(t), hmm.observation(t), obs[t]);
      rec.probability *= step.weight;
      rec.posteriors.push_back(step.posterior.vector());
      previous = step.posterior;
    }
    if (rec.probability > 0.0) out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

inline PosteriorAtlas build_posterior_atlas(const HmmSpec<FinStoch>& hmm, double dedup_tolerance = 1e-9) {
  hmm.validate();
  const std::size_t n = hmm.horizon();
  const auto prefixes = detail::enumerate_prefixes(hmm);
  PosteriorAtlas atlas;
  atlas.dedup_tolerance = dedup_tolerance;
  atlas.atoms.resize(n + 1);
  atlas.weights.resize(n + 1);
  for (std::size_t t = 0; t <= n; ++t) {
    std::vector<std::vector<double>> all;
    for (const auto& p : prefixes) all.push_back(p.posteriors[t]);
    std::sort(all.begin(), all.end());
    for (const auto& v : all) {
      const bool known = std::any_of(atlas.atoms[t].begin(), atlas.atoms[t].end(), [&](const auto& a) {
        return PosteriorAtlas::distance(a, v) <= dedup_tolerance;
      });
      if (!known) atlas.atoms[t].push_back(v);
    }
    for (std::size_t i = 0; i < atlas.atoms[t].size(); ++i)
      for (std::size_t j = i + 1; j < atlas.atoms[t].size(); ++j)
        if (PosteriorAtlas::distance(atlas.atoms[t][i], atlas.atoms[t][j]) <= 10 * dedup_tolerance)
          atlas.close_atoms = true;
    atlas.weights[t].assign(atlas.atoms[t].size(), 0.0);
    for (const auto& p : prefixes) atlas.weights[t][atlas.atom_of(t, p.posteriors[t])] += p.probability;
  }
  return atlas;
}

/// h_t over atlas atoms: from each atom at t-1, the probability of moving to
/// each atom at t after one predicted observation and update.
inline StochasticKernel filter_transition(const HmmSpec<FinStoch>& hmm, const PosteriorAtlas& atlas,
                                          std::size_t t) {
  const std::size_t rows = atlas.atoms.at(t).size();
  const Object target{rows};
  if (t == 0) {
    StochasticKernel h(Object::unit(), target);
    const auto f0 = hmm.transition(0);
    for (std::size_t y = 0; y < hmm.observation_space(0).cardinality(); ++y) {
      const auto step = filter_update<FinStoch>(f0, hmm.observation(0), {y});
      if (step.weight > 0.0) h.at(atlas.atom_of(0, step.posterior.vector()), 0) += step.weight;
    }
    return h;
  }
  const std::size_t cols = atlas.atoms.at(t - 1).size();
  StochasticKernel h(Object{cols}, target);
  for (std::size_t a = 0; a < cols; ++a) {
    const auto prior = finite::state_from<finite::ProbabilitySemiring>(hmm.state_space(t - 1), atlas.atoms[t - 1][a]);
    for (std::size_t y = 0; y < hmm.observation_space(t).cardinality(); ++y) {
      const auto step = filter_step<FinStoch>(prior, hmm.transition(t), hmm.observation(t), {y});
      if (step.weight > 0.0) h.at(atlas.atom_of(t, step.posterior.vector()), a) += step.weight;
    }
  }
  return h;
}

/// Verifies the filter-process theorem on the reachable-posterior atlas.
inline FilterChainReport verify_filter_markov(const HmmSpec<FinStoch>& hmm, double tolerance = 1e-12) {
  hmm.validate();
  const std::size_t n = hmm.horizon();
  const auto atlas = build_posterior_atlas(hmm);
  FilterChainReport report;
  report.instance = FinStoch::name;
  report.horizon = n;
  report.tolerance = tolerance;
  report.close_atoms = atlas.close_atoms;

  ChainSpec<FinStoch> chain;
  Object carrier;
  for (std::size_t t = 0; t <= n; ++t) {
    chain.kernels.push_back(filter_transition(hmm, atlas, t));
    report.carrier_sizes.push_back(atlas.atoms[t].size());
    carrier = carrier * Object{atlas.atoms[t].size()};
  }
  FinStoch::check_oracle_cap(carrier);

  // λ_n pushed forward along p^Y_[n]: each positive sequence contributes its
  // probability at the tuple of atoms it visits.
  StochasticKernel process(Object::unit(), carrier);
  std::vector<FinStoch::Morphism> kernels;
  for (std::size_t t = 0; t <= n; ++t) kernels.push_back(filter_recursive_kernel<FinStoch>(hmm, t));
  for (const auto& p : detail::enumerate_prefixes(hmm)) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t <= n; ++t) {
      idx.push_back(atlas.atom_of(t, p.posteriors[t]));
      // λ coherence: the uninstantiated B_t at this prefix lands on the same atom.
      const std::vector<std::size_t> prefix(p.observations.begin(), p.observations.begin() + static_cast<std::ptrdiff_t>(t + 1));
      const auto direct = instantiate<FinStoch>(kernels[t], prefix).vector();
      report.lambda_defect = std::max(report.lambda_defect, PosteriorAtlas::distance(direct, atlas.atoms[t][idx[t]]));
    }
    process.at(finite::flatten(carrier, idx), 0) += p.probability;
  }
  report.theorem_deviation = FinStoch::deviation(process, chain_joint(chain));

  // Update recursion at the atoms: stepping from B_{t-1}(y) equals B_t(y).
  for (const auto& p : detail::enumerate_prefixes(hmm))
    for (std::size_t t = 1; t <= n; ++t) {
      const auto prior = finite::state_from<finite::ProbabilitySemiring>(
          hmm.state_space(t - 1), atlas.atoms[t - 1][atlas.atom_of(t - 1, p.posteriors[t - 1])]);
      const auto step = filter_step<FinStoch>(prior, hmm.transition(t), hmm.observation(t), {p.observations[t]});
      report.update_defect =
          std::max(report.update_defect, PosteriorAtlas::distance(step.posterior.vector(), p.posteriors[t]));
    }

  report.obs_joint_defect = obs_joint_defect(hmm);
  report.markov_local =
      check_markov_properties(process, MarkovProperty::ChainLocal, {.tolerance = tolerance}).all_passed();
  return report;
}

}  // namespace markovcat::filterchain
