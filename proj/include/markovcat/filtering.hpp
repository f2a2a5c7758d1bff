#pragma once

#include <string>
#include <vector>

#include "markovcat/finite/finsetmulti.hpp"
#include "markovcat/finite/finstoch.hpp"
#include "markovcat/gauss/gauss.hpp"
#include "markovcat/models.hpp"

namespace markovcat {

template <MarkovCategory C>
struct FilterStep {
  MorphismOf<C> predicted;  // q_t, the prior on X_t before seeing y_t
  MorphismOf<C> posterior;  // B_t(y_[t])
  double weight = 1.0;      // predictive probability / possibility of y_t
  bool degenerate = false;  // weight was zero and the fallback fired
};

template <MarkovCategory C>
struct FilterRun {
  std::vector<FilterStep<C>> steps;

  bool any_degenerate() const {
    for (const auto& s : steps)
      if (s.degenerate) return true;
    return false;
  }
  const MorphismOf<C>& posterior(std::size_t t) const { return steps.at(t).posterior; }
};

namespace detail {

template <MarkovCategory C>
void check_observations(const HmmSpec<C>& hmm, const std::vector<PointOf<C>>& obs) {
  if (obs.empty() || obs.size() > hmm.horizon() + 1)
    throw DomainError("expected between 1 and " + std::to_string(hmm.horizon() + 1) +
                      " observations, got " + std::to_string(obs.size()));
}

template <MarkovCategory C>
std::vector<PointOf<C>> prefix(const std::vector<PointOf<C>>& obs, std::size_t first, std::size_t last) {
  return std::vector<PointOf<C>>(obs.begin() + static_cast<std::ptrdiff_t>(first),
                                 obs.begin() + static_cast<std::ptrdiff_t>(last));
}

}  // namespace detail

/// g_t ∘ f_t ∘ posterior: the distribution of the next observation.
template <MarkovCategory C>
MorphismOf<C> predictive_observation(const MorphismOf<C>& posterior, const MorphismOf<C>& f,
                                     const MorphismOf<C>& g) {
  return C::compose(C::compose(posterior, f), g);
}

/// One update: condition (copy; g branch) of the prediction q on Y and plug
/// in y.
template <MarkovCategory C>
FilterStep<C> filter_update(const MorphismOf<C>& q, const MorphismOf<C>& g, const PointOf<C>& y) {
  const std::size_t x[] = {0};
  const std::size_t obs_factor[] = {1};
  const auto joint = C::branch(q, x, g);
  FilterStep<C> step{q, q, C::weight(C::marginal(joint, obs_factor), y), false};
  step.degenerate = step.weight == 0.0;
  if (step.degenerate && keeps_prediction_on_degenerate<C>) return step;
  const auto kernel = C::conditional(joint, OutputPartition{{0}, {1}});
  step.posterior = C::normalize(instantiate<C>(kernel, y));
  return step;
}

/// One predict/update step starting from the previous posterior.
template <MarkovCategory C>
FilterStep<C> filter_step(const MorphismOf<C>& previous, const MorphismOf<C>& f,
                          const MorphismOf<C>& g, const PointOf<C>& y) {
  return filter_update<C>(C::compose(previous, f), g, y);
}

/// Instantiated Bayes filter: alternating prediction and update over the
/// given observations y_0..y_k (k ≤ n).
template <MarkovCategory C>
FilterRun<C> filter_instantiated(const HmmSpec<C>& hmm, const std::vector<PointOf<C>>& obs) {
  hmm.validate();
  detail::check_observations(hmm, obs);
  FilterRun<C> run;
  run.steps.push_back(filter_update<C>(hmm.transition(0), hmm.observation(0), obs[0]));
  for (std::size_t t = 1; t < obs.size(); ++t)
    run.steps.push_back(
        filter_step<C>(run.steps.back().posterior, hmm.transition(t), hmm.observation(t), obs[t]));
  return run;
}

/// Batch filter as a kernel Y_0 ⊗ ... ⊗ Y_t → X_t, obtained by conditioning
/// the brute-force joint.
template <MarkovCategory C>
MorphismOf<C> filter_batch_kernel(const HmmSpec<C>& hmm, std::size_t t) {
  const auto joint = hmm_joint(hmm.truncated(t));
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s <= t; ++s) order.push_back(y_factor(s));
  order.push_back(x_factor(t));
  const auto m = C::marginal(joint, order);
  return C::conditional(m, OutputPartition{{t + 1}, index_range(0, t + 1)});
}

/// Batch filter at time t for observations y_0..y_t.
template <MarkovCategory C>
ConditionedState<C> filter_batch(const HmmSpec<C>& hmm, std::size_t t, const std::vector<PointOf<C>>& obs) {
  if (obs.size() < t + 1) throw DomainError("filter_batch: need observations up to time t");
  if (t > hmm.horizon()) throw DomainError("filter_batch: t exceeds the horizon");
  const auto joint = hmm_joint(hmm.truncated(t));
  std::vector<std::size_t> given;
  for (std::size_t s = 0; s <= t; ++s) given.push_back(y_factor(s));
  return condition_joint<C>(joint, {x_factor(t)}, given, join_points(detail::prefix<C>(obs, 0, t + 1)));
}

/// Uninstantiated filter B_t : Y_0 ⊗ ... ⊗ Y_t → X_t by the conditional
/// recursion, starting from the Bayesian inverse of g_0 w.r.t. f_0.
template <MarkovCategory C>
MorphismOf<C> filter_recursive_kernel(const HmmSpec<C>& hmm, std::size_t t) {
  hmm.validate();
  if (t > hmm.horizon()) throw DomainError("filter_recursive_kernel: t exceeds the horizon");
  auto b = bayes_inverse<C>(hmm.observation(0), hmm.transition(0));
  for (std::size_t s = 1; s <= t; ++s) {
    C::check_oracle_cap(C::source(b) * hmm.observation_space(s) * hmm.state_space(s));
    const std::size_t x[] = {0};
    const auto joint = C::branch(C::compose(b, hmm.transition(s)), x, hmm.observation(s));
    b = C::conditional(joint, OutputPartition{{0}, {1}});
  }
  return b;
}

// ---------------------------------------------------------------------------
// Closed-form Kalman filter

struct KalmanState {
  gauss::Vector predicted_mean;  // m̃_t
  gauss::Matrix predicted_cov;   // P̃_t
  gauss::Matrix innovation_cov;  // S_t
  gauss::Matrix gain;            // K_t
  gauss::Vector mean;            // m_t
  gauss::Matrix cov;             // P_t
};

/// Textbook Kalman recursion with transition biases v_t and observation
/// biases w_t read off the affine Gaussian kernels.
inline std::vector<KalmanState> kalman_closed_form(const HmmSpec<Gauss>& hmm,
                                                   const std::vector<gauss::Vector>& obs) {
  using gauss::Matrix;
  using gauss::Vector;
  hmm.validate();
  detail::check_observations(hmm, obs);
  std::vector<KalmanState> out;
  Vector m;
  Matrix p;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto& f = hmm.transition(t);
    const auto& g = hmm.observation(t);
    KalmanState s;
    if (t == 0) {
      s.predicted_mean = f.mean();
      s.predicted_cov = f.cov();
    } else {
      s.predicted_mean = f.matrix() * m + f.mean();
      s.predicted_cov = f.matrix() * p * f.matrix().transpose() + f.cov();
    }
    const Matrix& h = g.matrix();
    s.innovation_cov = h * s.predicted_cov * h.transpose() + g.cov();
    s.gain = s.predicted_cov * h.transpose() * gauss::pinv(s.innovation_cov);
    s.mean = s.predicted_mean + s.gain * (obs[t] - h * s.predicted_mean - g.mean());
    s.cov = s.predicted_cov - s.gain * h * s.predicted_cov;
    s.cov = 0.5 * (s.cov + s.cov.transpose());
    m = s.mean;
    p = s.cov;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace markovcat
