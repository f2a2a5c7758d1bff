#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "markovcat/core/category.hpp"
#include "markovcat/finite/independence.hpp"

namespace markovcat {

/// A Markov chain up to horizon n: kernels[0] = f_0 : I → X_0 is the initial
/// state and kernels[t] = f_t : X_{t-1} → X_t. Every X_t is a single factor.
template <MarkovCategory C>
struct ChainSpec {
  std::vector<MorphismOf<C>> kernels;

  std::size_t horizon() const {
    if (kernels.empty()) throw DomainError("chain has no initial state");
    return kernels.size() - 1;
  }
  Object state_space(std::size_t t) const { return C::target(kernels.at(t)); }

  void validate() const {
    if (kernels.empty()) throw DomainError("chain has no initial state");
    if (!C::source(kernels[0]).is_unit()) throw DomainError("f_0 must be a state");
    for (std::size_t t = 0; t < kernels.size(); ++t) {
      if (C::target(kernels[t]).rank() != 1)
        throw DomainError("state space X_" + std::to_string(t) + " must be a single factor");
      if (t > 0 && C::source(kernels[t]) != C::target(kernels[t - 1]))
        throw DomainError("f_" + std::to_string(t) + " does not start at X_" + std::to_string(t - 1));
    }
  }

  ChainSpec truncated(std::size_t t) const {
    return ChainSpec{std::vector<MorphismOf<C>>(kernels.begin(), kernels.begin() + t + 1)};
  }
};

/// A hidden Markov model: a chain plus observation kernels g_t : X_t → Y_t.
template <MarkovCategory C>
struct HmmSpec {
  ChainSpec<C> chain;
  std::vector<MorphismOf<C>> observations;

  std::size_t horizon() const { return chain.horizon(); }
  const MorphismOf<C>& transition(std::size_t t) const { return chain.kernels.at(t); }
  const MorphismOf<C>& observation(std::size_t t) const { return observations.at(t); }
  Object state_space(std::size_t t) const { return chain.state_space(t); }
  Object observation_space(std::size_t t) const { return C::target(observations.at(t)); }

  void validate() const {
    chain.validate();
    if (observations.size() != chain.kernels.size())
      throw DomainError("need one observation kernel per time step");
    for (std::size_t t = 0; t < observations.size(); ++t) {
      if (C::source(observations[t]) != chain.state_space(t))
        throw DomainError("g_" + std::to_string(t) + " does not start at X_" + std::to_string(t));
      if (C::target(observations[t]).rank() != 1)
        throw DomainError("observation space Y_" + std::to_string(t) + " must be a single factor");
    }
  }

  HmmSpec truncated(std::size_t t) const {
    return HmmSpec{chain.truncated(t),
                   std::vector<MorphismOf<C>>(observations.begin(), observations.begin() + t + 1)};
  }

  /// Object of the interleaved joint X_0, Y_0, ..., X_n, Y_n.
  Object joint_object() const {
    Object out;
    for (std::size_t t = 0; t <= horizon(); ++t) out = out * state_space(t) * observation_space(t);
    return out;
  }
};

/// Factor positions in the interleaved HMM joint.
inline std::size_t x_factor(std::size_t t) { return 2 * t; }
inline std::size_t y_factor(std::size_t t) { return 2 * t + 1; }

/// The joint state on X_0 ⊗ ... ⊗ X_n built by the chain factorization.
template <MarkovCategory C>
MorphismOf<C> chain_joint(const ChainSpec<C>& spec) {
  spec.validate();
  Object all;
  for (std::size_t t = 0; t <= spec.horizon(); ++t) all = all * spec.state_space(t);
  C::check_oracle_cap(all);
  auto p = spec.kernels[0];
  for (std::size_t t = 1; t <= spec.horizon(); ++t) {
    const std::size_t prev[] = {t - 1};
    p = C::branch(p, prev, spec.kernels[t]);
  }
  return p;
}

/// The joint state on X_0 ⊗ Y_0 ⊗ ... ⊗ X_n ⊗ Y_n of an HMM.
template <MarkovCategory C>
MorphismOf<C> hmm_joint(const HmmSpec<C>& spec) {
  spec.validate();
  C::check_oracle_cap(spec.joint_object());
  auto p = spec.transition(0);
  const std::size_t first[] = {0};
  p = C::branch(p, first, spec.observation(0));
  for (std::size_t t = 1; t <= spec.horizon(); ++t) {
    const std::size_t prev[] = {x_factor(t - 1)};
    p = C::branch(p, prev, spec.transition(t));
    const std::size_t now[] = {x_factor(t)};
    p = C::branch(p, now, spec.observation(t));
  }
  return p;
}

/// Result of conditioning a joint on some of its factors at given values.
template <MarkovCategory C>
struct ConditionedState {
  MorphismOf<C> state;
  double weight = 1.0;      // probability / possibility of the given values
  bool degenerate = false;  // weight was zero, state is the fallback branch
};

/// Marginalizes the joint onto targets ∪ given, conditions on `given` and
/// plugs in `values`. With `given` empty this is the marginal on `targets`.
template <MarkovCategory C>
ConditionedState<C> condition_joint(const MorphismOf<C>& joint, const std::vector<std::size_t>& targets,
                                    const std::vector<std::size_t>& given,
                                    const typename C::Point& values) {
  C::check_oracle_cap(C::target(joint));
  std::vector<std::size_t> order = targets;
  order.insert(order.end(), given.begin(), given.end());
  auto m = C::marginal(joint, order);
  const OutputPartition part{index_range(0, targets.size()),
                             index_range(targets.size(), order.size())};
  auto kernel = C::conditional(m, part);
  const double w = C::weight(C::marginal(joint, given), values);
  return {C::normalize(instantiate<C>(kernel, values)), w, w == 0.0};
}

/// Reverse kernel of a stationary chain: the Bayesian inverse of f w.r.t. f0.
template <MarkovCategory C>
MorphismOf<C> reverse_chain(const MorphismOf<C>& f, const MorphismOf<C>& f0,
                            double tol = C::default_tolerance()) {
  if (C::source(f) != C::target(f)) throw DomainError("reverse_chain: f must be an endomorphism");
  if (C::deviation(C::compose(f0, f), f0) > tol)
    throw DomainError("reverse_chain: initial state is not stationary");
  return bayes_inverse<C>(f, f0);
}

/// Recovers a chain from a joint on X_0 ⊗ ... ⊗ X_n by conditioning each
/// X_t on X_{t-1}.
template <MarkovCategory C>
ChainSpec<C> extract_chain(const MorphismOf<C>& joint) {
  ChainSpec<C> spec;
  const std::size_t first[] = {0};
  spec.kernels.push_back(C::marginal(joint, first));
  for (std::size_t t = 1; t < C::target(joint).rank(); ++t) {
    const std::size_t pair[] = {t, t - 1};
    spec.kernels.push_back(C::conditional(C::marginal(joint, pair), OutputPartition{{0}, {1}}));
  }
  return spec;
}

/// Recovers f_t and g_t from an interleaved HMM joint.
template <MarkovCategory C>
HmmSpec<C> extract_hmm(const MorphismOf<C>& joint) {
  const std::size_t rank = C::target(joint).rank();
  if (rank % 2 != 0 || rank == 0) throw DomainError("extract_hmm: expects an interleaved joint");
  HmmSpec<C> spec;
  for (std::size_t t = 0; 2 * t < rank; ++t) {
    if (t == 0) {
      const std::size_t first[] = {0};
      spec.chain.kernels.push_back(C::marginal(joint, first));
    } else {
      const std::size_t pair[] = {x_factor(t), x_factor(t - 1)};
      spec.chain.kernels.push_back(C::conditional(C::marginal(joint, pair), OutputPartition{{0}, {1}}));
    }
    const std::size_t obs[] = {y_factor(t), x_factor(t)};
    spec.observations.push_back(C::conditional(C::marginal(joint, obs), OutputPartition{{0}, {1}}));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Markov properties (finite instances)

enum class MarkovProperty { ChainLocal, ChainGlobal, HmmBackward, HmmLocal, HmmGlobal };

inline const char* to_string(MarkovProperty p) {
  switch (p) {
    case MarkovProperty::ChainLocal: return "chain-local";
    case MarkovProperty::ChainGlobal: return "chain-global";
    case MarkovProperty::HmmBackward: return "hmm-backward";
    case MarkovProperty::HmmLocal: return "hmm-local";
    case MarkovProperty::HmmGlobal: return "hmm-global";
  }
  return "?";
}

/// One statement A ⊥ B | G over joint factor indices.
struct CiStatement {
  std::vector<std::size_t> left;
  std::vector<std::size_t> given;
  std::vector<std::size_t> right;
  std::string label;
};

struct CiResult {
  CiStatement statement;
  double defect = 0.0;
  bool passed = false;
};

struct MarkovReport {
  MarkovProperty property;
  std::vector<CiResult> results;
  bool exhaustive = true;

  bool all_passed() const {
    return std::all_of(results.begin(), results.end(), [](const CiResult& r) { return r.passed; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const CiResult& r) { return !r.passed; }));
  }
  double max_defect() const {
    double m = 0.0;
    for (const auto& r : results) m = std::max(m, r.defect);
    return m;
  }
};

struct MarkovCheckOptions {
  double tolerance = 1e-12;
  /// Global properties are enumerated exhaustively while the number of
  /// candidate set assignments stays below this; beyond it a seeded sample of
  /// `sample_size` assignments is checked.
  std::size_t exhaustive_limit = 5000;
  std::size_t sample_size = 400;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

inline std::string set_label(char sym, const std::vector<std::size_t>& times) {
  if (times.empty()) return "";
  std::string s;
  s += sym;
  s += '{';
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(times[i]);
  }
  s += '}';
  return s;
}

inline std::string join_labels(std::initializer_list<std::string> parts) {
  std::string s;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!s.empty()) s += ",";
    s += p;
  }
  return s.empty() ? "I" : s;
}

inline std::vector<std::size_t> map_times(const std::vector<std::size_t>& times,
                                          std::size_t (*pos)(std::size_t)) {
  std::vector<std::size_t> out;
  for (auto t : times) out.push_back(pos(t));
  return out;
}

inline std::size_t chain_pos(std::size_t t) { return t; }

inline std::vector<std::size_t> concat(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// Every pair a ∈ sources, b ∈ sinks has some s ∈ separators with
/// min(a,b) ≤ s ≤ max(a,b). Endpoints of X-type are never in the separator
/// set, so for X–X pairs this is strict betweenness.
inline bool separated(const std::vector<std::size_t>& sources, const std::vector<std::size_t>& sinks,
                      const std::vector<std::size_t>& separators) {
  for (auto a : sources)
    for (auto b : sinks) {
      const auto lo = std::min(a, b), hi = std::max(a, b);
      const bool blocked = std::any_of(separators.begin(), separators.end(),
                                       [&](std::size_t s) { return lo <= s && s <= hi; });
      if (!blocked) return false;
    }
  return true;
}

inline std::vector<std::size_t> members_with(const std::vector<int>& roles, int role) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i)
    if (roles[i] == role) out.push_back(i);
  return out;
}

/// Decodes assignment `code` in base 4 into per-slot roles 0..3.
inline std::vector<int> decode_roles(std::uint64_t code, std::size_t slots) {
  std::vector<int> roles(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    roles[i] = static_cast<int>(code % 4);
    code /= 4;
  }
  return roles;
}

}  // namespace detail

/// CI statements making up a Markov property of a chain (n+1 single-factor
/// states) or an interleaved HMM joint. Times refer to the factor layout
/// X_0, ..., X_n (chains) or X_0, Y_0, ..., X_n, Y_n (HMMs).
inline std::vector<CiStatement> markov_statements(MarkovProperty which, std::size_t n,
                                                  const MarkovCheckOptions& opt, bool* exhaustive) {
  using detail::concat;
  using detail::map_times;
  using detail::set_label;
  std::vector<CiStatement> out;
  if (exhaustive) *exhaustive = true;

  switch (which) {
    case MarkovProperty::ChainLocal:
      for (std::size_t t = 2; t <= n; ++t) {
        auto past = index_range(0, t - 1);
        out.push_back({{t}, {t - 1}, past,
                       "X" + std::to_string(t) + " _|_ " + set_label('X', past) + " | X" +
                           std::to_string(t - 1)});
      }
      return out;

    case MarkovProperty::HmmBackward:
    case MarkovProperty::HmmLocal:
      for (std::size_t t = 1; t <= n; ++t) {
        auto past = index_range(0, t - 1);
        auto ypast = index_range(0, t);
        out.push_back({{x_factor(t)}, {x_factor(t - 1)},
                       concat(map_times(past, x_factor), map_times(ypast, y_factor)),
                       "X" + std::to_string(t) + " _|_ " +
                           detail::join_labels({set_label('X', past), set_label('Y', ypast)}) +
                           " | X" + std::to_string(t - 1)});
      }
      if (which == MarkovProperty::HmmBackward) {
        for (std::size_t t = 1; t <= n; ++t) {
          auto past = index_range(0, t);
          out.push_back({{y_factor(t)}, {x_factor(t)},
                         concat(map_times(past, y_factor), map_times(past, x_factor)),
                         "Y" + std::to_string(t) + " _|_ " +
                             detail::join_labels({set_label('Y', past), set_label('X', past)}) +
                             " | X" + std::to_string(t)});
        }
      } else {
        for (std::size_t t = 0; t <= n; ++t) {
          std::vector<std::size_t> others, rest;
          for (std::size_t s = 0; s <= n; ++s)
            if (s != t) others.push_back(s);
          rest = concat(map_times(others, x_factor), map_times(others, y_factor));
          if (rest.empty()) continue;
          out.push_back({{y_factor(t)}, {x_factor(t)}, rest,
                         "Y" + std::to_string(t) + " _|_ " +
                             detail::join_labels({set_label('X', others), set_label('Y', others)}) +
                             " | X" + std::to_string(t)});
        }
      }
      return out;

    case MarkovProperty::ChainGlobal:
    case MarkovProperty::HmmGlobal: {
      const bool hmm = which == MarkovProperty::HmmGlobal;
      const std::size_t slots = hmm ? 2 * (n + 1) : n + 1;
      // Each slot takes a role: 0 unused, 1 left, 2 given, 3 right. Only
      // X-slots may be separators (given Y's never block a path and are
      // recorded as-is).
      const double total = std::pow(4.0, static_cast<double>(slots));
      std::vector<std::uint64_t> codes;
      if (total <= static_cast<double>(opt.exhaustive_limit)) {
        for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(total); ++c) codes.push_back(c);
      } else {
        if (exhaustive) *exhaustive = false;
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<std::uint64_t> pick(0, static_cast<std::uint64_t>(total) - 1);
        std::size_t tries = 0;
        while (codes.size() < opt.sample_size && tries++ < 1000 * opt.sample_size) {
          const auto c = pick(rng);
          auto roles = detail::decode_roles(c, slots);
          auto left = detail::members_with(roles, 1), right = detail::members_with(roles, 3);
          if (left.empty() || right.empty()) continue;
          codes.push_back(c);
        }
      }
      for (auto code : codes) {
        auto roles = detail::decode_roles(code, slots);
        auto left = detail::members_with(roles, 1);
        auto given = detail::members_with(roles, 2);
        auto right = detail::members_with(roles, 3);
        if (left.empty() || right.empty()) continue;
        // Canonical orientation: the side containing the smallest slot goes left.
        if (right.front() < left.front()) continue;
        auto time_of = [&](std::size_t slot) { return hmm ? slot / 2 : slot; };
        std::vector<std::size_t> lt, rt, sep;
        for (auto s : left) lt.push_back(time_of(s));
        for (auto s : right) rt.push_back(time_of(s));
        for (auto s : given)
          if (!hmm || s % 2 == 0) sep.push_back(time_of(s));
        if (!detail::separated(lt, rt, sep)) continue;
        auto describe = [&](const std::vector<std::size_t>& group) {
          std::vector<std::size_t> xs, ys;
          for (auto s : group) (hmm && s % 2 == 1 ? ys : xs).push_back(time_of(s));
          return detail::join_labels({set_label('X', xs), set_label('Y', ys)});
        };
        out.push_back({left, given, right,
                       describe(left) + " _|_ " + describe(right) + " | " + describe(given)});
      }
      return out;
    }
  }
  return out;
}

/// Evaluates every CI statement of the chosen Markov property on a finite
/// joint. Chain properties expect n+1 factors X_0..X_n; HMM properties expect
/// the interleaved layout.
template <class S>
MarkovReport check_markov_properties(const finite::Kernel<S>& joint, MarkovProperty which,
                                     const MarkovCheckOptions& opt = {}) {
  if (!joint.source().is_unit()) throw DomainError("check_markov_properties: expects a state");
  if (joint.target().cardinality() > 1'000'000)
    throw ResourceError("joint exceeds the oracle cap of 1000000 entries");
  const bool hmm = which == MarkovProperty::HmmBackward || which == MarkovProperty::HmmLocal ||
                   which == MarkovProperty::HmmGlobal;
  const std::size_t rank = joint.target().rank();
  if (rank == 0 || (hmm && rank % 2 != 0))
    throw DomainError("check_markov_properties: joint layout does not match the property");
  const std::size_t n = hmm ? rank / 2 - 1 : rank - 1;

  MarkovReport report{which, {}, true};
  const auto statements = markov_statements(which, n, opt, &report.exhaustive);
  report.results.resize(statements.size());
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const auto& st = statements[i];
    const double d = finite::ci_defect(joint, st.left, st.given, st.right);
    report.results[i] = {st, d, d <= opt.tolerance};
  }
  return report;
}

}  // namespace markovcat
