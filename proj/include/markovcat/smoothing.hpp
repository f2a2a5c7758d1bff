#pragma once

#include <algorithm>
#include <vector>

#include "markovcat/filtering.hpp"

namespace markovcat {

template <MarkovCategory C>
struct SmootherRun {
  std::vector<MorphismOf<C>> smoothed;  // Ŝ_{t|n}(y_[n]) for t = 0..n
  std::vector<bool> degenerate;
  /// Backward kernels X_{t+1} → X_t (t = 0..n-1); in Gauss their matrix is
  /// the smoother gain C_t.
  std::vector<MorphismOf<C>> backward;

  bool any_degenerate() const {
    return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
  }
};

/// Fixed-interval recursion: Ŝ_n = B_n and Ŝ_t is Ŝ_{t+1} pushed through the
/// Bayesian inverse of f_{t+1} with respect to the filter posterior at t.
template <MarkovCategory C>
SmootherRun<C> fixed_interval_instantiated(const HmmSpec<C>& hmm, const FilterRun<C>& filter) {
  const std::size_t steps = filter.steps.size();
  if (steps == 0 || steps > hmm.horizon() + 1) throw DomainError("fixed_interval: filter run does not match model");
  SmootherRun<C> run;
  run.smoothed.resize(steps, filter.posterior(steps - 1));
  run.degenerate.assign(steps, filter.any_degenerate());
  run.backward.resize(steps - 1, filter.posterior(0));
  for (std::size_t t = steps - 1; t-- > 0;) {
    run.backward[t] = bayes_inverse<C>(hmm.transition(t + 1), filter.posterior(t));
    run.smoothed[t] = C::normalize(C::compose(run.smoothed[t + 1], run.backward[t]));
  }
  return run;
}

/// α_t as a state on Y_0 ⊗ ... ⊗ Y_t ⊗ X_t, for t = 0..t_max.
template <MarkovCategory C>
std::vector<MorphismOf<C>> forward_alphas(const HmmSpec<C>& hmm, std::size_t t_max) {
  hmm.validate();
  if (t_max > hmm.horizon()) throw DomainError("forward_alphas: t_max exceeds the horizon");
  std::vector<MorphismOf<C>> out;
  const std::size_t first[] = {0};
  const std::size_t swap_order[] = {1, 0};
  out.push_back(C::marginal(C::branch(hmm.transition(0), first, hmm.observation(0)), swap_order));
  for (std::size_t t = 1; t <= t_max; ++t) {
    C::check_oracle_cap(C::target(out.back()) * hmm.state_space(t) * hmm.observation_space(t));
    // Y_[t-1], X_{t-1}  →  Y_[t-1], X_t  →  Y_[t-1], X_t, Y_t  →  Y_[t], X_t
    auto a = transform<C>(out.back(), {t}, hmm.transition(t));
    const std::size_t xt[] = {t};
    a = C::branch(a, xt, hmm.observation(t));
    auto order = index_range(0, t);
    order.push_back(t + 1);
    order.push_back(t);
    out.push_back(C::marginal(a, order));
  }
  return out;
}

/// β_t : X_t → Y_{t+1} ⊗ ... ⊗ Y_n for t = t_min..n (index t - t_min).
template <MarkovCategory C>
std::vector<MorphismOf<C>> backward_betas(const HmmSpec<C>& hmm, std::size_t t_min) {
  hmm.validate();
  const std::size_t n = hmm.horizon();
  if (t_min > n) throw DomainError("backward_betas: t_min exceeds the horizon");
  std::vector<MorphismOf<C>> out(n - t_min + 1, C::discard(hmm.state_space(n)));
  for (std::size_t t = n; t-- > t_min;) {
    const auto& next = out[t + 1 - t_min];
    C::check_oracle_cap(hmm.state_space(t) * C::target(next) * hmm.observation_space(t + 1));
    const auto ahead = C::compose(C::copy(hmm.state_space(t + 1)), C::tensor(hmm.observation(t + 1), next));
    out[t - t_min] = C::compose(hmm.transition(t + 1), ahead);
  }
  return out;
}

template <MarkovCategory C>
struct SmoothedState {
  MorphismOf<C> state;
  bool degenerate = false;
};

/// Smoother via the filter posterior: branch B_t(y_[t]) with β_t, condition on
/// the future observations and plug them in. Materializes β_t, so it is
/// bounded by the oracle cap.
template <MarkovCategory C>
SmoothedState<C> smoother_from_filter(const HmmSpec<C>& hmm, const FilterRun<C>& filter,
                                      const std::vector<PointOf<C>>& obs, std::size_t t) {
  const std::size_t n = obs.size() - 1;
  if (filter.steps.size() != obs.size() || t > n) throw DomainError("smoother_from_filter: bad time index");
  SmoothedState<C> out{filter.posterior(t), filter.any_degenerate()};
  if (t == n) return out;
  const auto beta = backward_betas<C>(hmm.truncated(n), t).front();
  const std::size_t x[] = {0};
  const auto joint = C::branch(filter.posterior(t), x, beta);
  const auto future = index_range(1, n - t + 1);
  const auto y = join_points(detail::prefix<C>(obs, t + 1, n + 1));
  if (C::weight(C::marginal(joint, future), y) == 0.0) out.degenerate = true;
  out.state = C::normalize(instantiate<C>(C::conditional(joint, OutputPartition{{0}, future}), y));
  return out;
}

/// Batch smoother as a kernel Y_0 ⊗ ... ⊗ Y_n → X_t from the brute-force
/// joint.
template <MarkovCategory C>
MorphismOf<C> smoother_batch_kernel(const HmmSpec<C>& hmm, std::size_t t) {
  const std::size_t n = hmm.horizon();
  if (t > n) throw DomainError("smoother_batch_kernel: t exceeds the horizon");
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s <= n; ++s) order.push_back(y_factor(s));
  order.push_back(x_factor(t));
  const auto m = C::marginal(hmm_joint(hmm), order);
  return C::conditional(m, OutputPartition{{n + 1}, index_range(0, n + 1)});
}

template <MarkovCategory C>
ConditionedState<C> smoother_batch(const HmmSpec<C>& hmm, std::size_t t, const std::vector<PointOf<C>>& obs) {
  if (obs.size() != hmm.horizon() + 1) throw DomainError("smoother_batch: need observations y_0..y_n");
  std::vector<std::size_t> given;
  for (std::size_t s = 0; s <= hmm.horizon(); ++s) given.push_back(y_factor(s));
  return condition_joint<C>(hmm_joint(hmm), {x_factor(t)}, given, join_points(obs));
}

// ---------------------------------------------------------------------------
// Instantiated forward–backward for the finite instances

/// Runs the instantiated α and β recursions with the observations plugged in
/// at each step, never forming product spaces, and returns Ŝ_{t|n} for every
/// t. Probabilities are rescaled per step; the boolean semiring needs none.
template <MarkovCategory C>
  requires requires { typename C::Morphism::semiring; }
SmootherRun<C> forward_backward_instantiated_all(const HmmSpec<C>& hmm,
                                                 const std::vector<PointOf<C>>& obs) {
  using S = typename C::Morphism::semiring;
  using V = typename S::value_type;
  hmm.validate();
  if (obs.size() != hmm.horizon() + 1) throw DomainError("forward_backward: need observations y_0..y_n");
  const std::size_t n = hmm.horizon();

  auto rescale = [](std::vector<V>& v) {
    if constexpr (!S::exact) {
      double top = 0.0;
      for (double x : v) top = std::max(top, x);
      if (top > 0.0)
        for (double& x : v) x /= top;
    }
  };
  auto likelihood = [&](std::size_t t, std::size_t x) {
    return hmm.observation(t)(obs[t].at(0), x);
  };

  std::vector<std::vector<V>> alpha(n + 1), beta(n + 1);
  {
    const auto& f0 = hmm.transition(0);
    alpha[0].resize(f0.rows());
    for (std::size_t x = 0; x < f0.rows(); ++x) alpha[0][x] = S::mul(likelihood(0, x), f0(x, 0));
    rescale(alpha[0]);
  }
  for (std::size_t t = 1; t <= n; ++t) {
    const auto& f = hmm.transition(t);
    alpha[t].assign(f.rows(), S::zero());
    for (std::size_t x = 0; x < f.rows(); ++x) {
      V acc = S::zero();
      for (std::size_t xp = 0; xp < f.cols(); ++xp) acc = S::add(acc, S::mul(f(x, xp), alpha[t - 1][xp]));
      alpha[t][x] = S::mul(likelihood(t, x), acc);
    }
    rescale(alpha[t]);
  }
  beta[n].assign(hmm.state_space(n).cardinality(), S::one());
  for (std::size_t t = n; t-- > 0;) {
    const auto& f = hmm.transition(t + 1);
    beta[t].assign(f.cols(), S::zero());
    for (std::size_t x = 0; x < f.cols(); ++x) {
      V acc = S::zero();
      for (std::size_t xn = 0; xn < f.rows(); ++xn)
        acc = S::add(acc, S::mul(f(xn, x), S::mul(likelihood(t + 1, xn), beta[t + 1][xn])));
      beta[t][x] = acc;
    }
    rescale(beta[t]);
  }

  SmootherRun<C> run;
  for (std::size_t t = 0; t <= n; ++t) {
    std::vector<V> col(alpha[t].size());
    bool zero = true;
    for (std::size_t x = 0; x < col.size(); ++x) {
      col[x] = S::mul(alpha[t][x], beta[t][x]);
      zero = zero && S::is_zero(col[x]);
    }
    C::normalize_column(col);
    run.smoothed.push_back(finite::state_from<S>(hmm.state_space(t), std::move(col)));
    run.degenerate.push_back(zero);
  }
  // A zero normalizer anywhere means the whole sequence is impossible.
  if (run.any_degenerate()) run.degenerate.assign(n + 1, true);
  return run;
}

template <MarkovCategory C>
  requires requires { typename C::Morphism::semiring; }
SmoothedState<C> forward_backward_instantiated(const HmmSpec<C>& hmm, const std::vector<PointOf<C>>& obs,
                                               std::size_t t) {
  auto run = forward_backward_instantiated_all<C>(hmm, obs);
  return {run.smoothed.at(t), run.degenerate.at(t)};
}

// ---------------------------------------------------------------------------
// Closed-form RTS smoother

struct RtsState {
  gauss::Vector mean;  // m̂_t
  gauss::Matrix cov;   // P̂_t
  gauss::Matrix gain;  // C_t (empty at t = n)
};

inline std::vector<RtsState> rts_closed_form(const HmmSpec<Gauss>& hmm, const std::vector<KalmanState>& kalman) {
  if (kalman.empty() || kalman.size() > hmm.horizon() + 1) throw DomainError("rts: Kalman run does not match model");
  const std::size_t n = kalman.size() - 1;
  std::vector<RtsState> out(n + 1);
  out[n] = {kalman[n].mean, kalman[n].cov, gauss::Matrix()};
  for (std::size_t t = n; t-- > 0;) {
    const auto& k = kalman[t];
    const auto& next = kalman[t + 1];
    const gauss::Matrix c = k.cov * hmm.transition(t + 1).matrix().transpose() * gauss::pinv(next.predicted_cov);
    out[t].gain = c;
    out[t].mean = k.mean + c * (out[t + 1].mean - next.predicted_mean);
    gauss::Matrix p = k.cov + c * (out[t + 1].cov - next.predicted_cov) * c.transpose();
    out[t].cov = 0.5 * (p + p.transpose());
  }
  return out;
}

}  // namespace markovcat
