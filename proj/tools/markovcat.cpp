// markovcat: command-line front end for filtering, smoothing, simulation and
// property verification on finite and Gaussian hidden Markov models.
//
// Exit codes: 0 ok, 2 input error, 3 resource cap exceeded, 4 property-suite
// failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "markovcat/io/json_text.hpp"
#include "markovcat/io/model_file.hpp"
#include "markovcat/markovcat.hpp"

namespace {

using namespace markovcat;
using io::Json;

constexpr const char* kToolVersion = "1.0.0";

enum ExitCode { kOk = 0, kInputError = 2, kResourceError = 3, kSuiteFailure = 4 };

struct Options {
  std::string model_path;
  std::string observations_path;
  std::string out_path;
  std::string method = "forward-backward";
  std::string suite;
  std::uint64_t seed = 0;
  std::optional<std::size_t> steps;
  std::optional<double> tolerance;
  bool timing = false;
};

/// Thrown for requests the chosen instance cannot serve.
struct Unsupported : DomainError {
  using DomainError::DomainError;
};

// ---------------------------------------------------------------------------
// JSON encoding of states and points

Json vector_json(const gauss::Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const gauss::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json state_json(const StochasticKernel& s, const std::vector<std::string>&) {
  return Json{{"probabilities", s.vector()}};
}

Json state_json(const MultiKernel& s, const std::vector<std::string>& names) {
  Json out{{"members", finsetmulti::members(s)}};
  if (!names.empty()) {
    Json labels = Json::array();
    for (auto m : finsetmulti::members(s)) labels.push_back(m < names.size() ? names[m] : std::to_string(m));
    out["labels"] = labels;
  }
  return out;
}

Json state_json(const gauss::GaussMap& s, const std::vector<std::string>&) {
  return Json{{"mean", vector_json(s.mean())}, {"cov", matrix_json(s.cov())}};
}

Json point_json(const std::vector<std::size_t>& p) { return p.at(0); }
Json point_json(const gauss::Vector& p) { return vector_json(p); }

// ---------------------------------------------------------------------------
// Report assembly

struct Inputs {
  io::ModelFile model;
  std::string digest;
};

Inputs load(const Options& opt, bool with_observations) {
  const std::string model_text = io::read_file(opt.model_path);
  std::uint64_t h = io::fnv1a(model_text);
  if (with_observations) {
    h = io::fnv1a(std::string(1, '\0'), h);
    h = io::fnv1a(io::read_file(opt.observations_path), h);
  }
  return {io::parse_model(model_text), "fnv1a64:" + io::hex64(h)};
}

Json header(const std::string& command, const Inputs& in) {
  return Json{{"schema_version", io::kSchemaVersion},
              {"tool", "markovcat"},
              {"version", kToolVersion},
              {"command", command},
              {"category", in.model.category},
              {"horizon", in.model.horizon},
              {"input_digest", in.digest}};
}

void emit(const Options& opt, const Json& report) {
  const std::string text = io::to_text(report);
  if (opt.out_path.empty())
    std::cout << text;
  else
    io::write_file_atomic(opt.out_path, text);
}

double default_tolerance(const std::string& category) {
  if (category == "gauss") return Gauss::default_tolerance();
  if (category == "finsetmulti") return FinSetMulti::default_tolerance();
  return FinStoch::default_tolerance();
}

/// --tolerance, else MARKOVCAT_TOLERANCE, else the instance default.
double tolerance_for(const Options& opt, const std::string& category) {
  if (opt.tolerance) return *opt.tolerance;
  if (const char* env = std::getenv("MARKOVCAT_TOLERANCE")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v >= 0.0)) throw io::InputError("MARKOVCAT_TOLERANCE", "expected a nonnegative number");
    return v;
  }
  return default_tolerance(category);
}

template <MarkovCategory C>
std::vector<PointOf<C>> load_observations(const Options& opt, const HmmSpec<C>& hmm) {
  auto obs = io::parse_observations<PointOf<C>>(io::read_file(opt.observations_path));
  io::check_observations_fit(hmm, obs);
  return obs;
}

Json degenerate_list(const std::vector<bool>& flags) {
  Json out = Json::array();
  for (std::size_t t = 0; t < flags.size(); ++t)
    if (flags[t]) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// filter

template <MarkovCategory C>
Json run_filter(const Options& opt, const io::ModelFile& model, const HmmSpec<C>& hmm) {
  const auto obs = load_observations(opt, hmm);
  const auto run = filter_instantiated(hmm, obs);
  Json steps = Json::array();
  std::vector<bool> flags;
  for (std::size_t t = 0; t < run.steps.size(); ++t) {
    const auto& s = run.steps[t];
    steps.push_back(Json{{"t", t},
                         {"observation", point_json(obs[t])},
                         {"predicted", state_json(s.predicted, model.state_names)},
                         {"posterior", state_json(s.posterior, model.state_names)},
                         {"weight", s.weight},
                         {"degenerate", s.degenerate}});
    flags.push_back(s.degenerate);
  }
  return Json{{"steps", steps}, {"degenerate_steps", degenerate_list(flags)}};
}

// ---------------------------------------------------------------------------
// smooth

template <MarkovCategory C>
Json run_smooth(const Options& opt, const io::ModelFile& model, const HmmSpec<C>& full) {
  if (opt.method != "forward-backward" && opt.method != "fixed-interval")
    throw io::InputError("--method", "unknown method \"" + opt.method + "\", expected forward-backward or fixed-interval");
  const auto obs = load_observations(opt, full);
  const auto hmm = full.truncated(obs.size() - 1);
  const auto filter = filter_instantiated(hmm, obs);

  SmootherRun<C> run;
  if (opt.method == "fixed-interval") {
    run = fixed_interval_instantiated(hmm, filter);
  } else if constexpr (requires { typename C::Morphism::semiring; }) {
    run = forward_backward_instantiated_all(hmm, obs);
  } else {
    for (std::size_t t = 0; t < obs.size(); ++t) {
      auto s = smoother_from_filter(hmm, filter, obs, t);
      run.smoothed.push_back(s.state);
      run.degenerate.push_back(s.degenerate);
    }
  }

  Json steps = Json::array();
  for (std::size_t t = 0; t < run.smoothed.size(); ++t) {
    Json step{{"t", t}, {"smoothed", state_json(run.smoothed[t], model.state_names)}, {"degenerate", bool(run.degenerate[t])}};
    if constexpr (std::is_same_v<C, Gauss>)
      if (t < run.backward.size()) step["gain"] = matrix_json(run.backward[t].matrix());
    steps.push_back(std::move(step));
  }
  return Json{{"method", opt.method}, {"steps", steps}, {"degenerate_steps", degenerate_list(run.degenerate)}};
}

// ---------------------------------------------------------------------------
// simulate

template <MarkovCategory C>
Json run_simulate(const Options& opt, const HmmSpec<C>& hmm) {
  const std::size_t steps = opt.steps.value_or(hmm.horizon());
  if (steps > hmm.horizon())
    throw io::InputError("--steps", std::to_string(steps) + " exceeds the model horizon " + std::to_string(hmm.horizon()));
  const auto traj = simulate(hmm, steps, opt.seed);
  Json states = Json::array(), observations = Json::array();
  for (const auto& x : traj.states) states.push_back(point_json(x));
  for (const auto& y : traj.observations) observations.push_back(point_json(y));
  return Json{{"seed", opt.seed}, {"steps", steps}, {"trajectory", states}, {"observations", observations}};
}

// ---------------------------------------------------------------------------
// verify

struct Property {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string note;
};

class Suite {
 public:
  explicit Suite(double tol) : tol_(tol) {}

  /// Records a deviation; properties with the same name keep the worst one.
  void record(const std::string& name, double deviation, std::optional<double> tol = std::nullopt) {
    const double limit = tol.value_or(tol_);
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = props_.size();
      props_.push_back({name, 0.0, limit, true, {}});
      it = index_.find(name);
    }
    auto& p = props_[it->second];
    p.deviation = std::max(p.deviation, deviation);
    p.passed = p.passed && deviation <= limit;
  }

  void check(const std::string& name, bool ok, const std::string& note = {}) {
    record(name, ok ? 0.0 : 1.0, 0.0);
    if (!note.empty()) props_[index_[name]].note = note;
  }

  bool passed() const {
    return std::all_of(props_.begin(), props_.end(), [](const Property& p) { return p.passed; });
  }

  Json json() const {
    Json out = Json::array();
    for (const auto& p : props_) {
      Json e{{"name", p.name}, {"deviation", p.deviation}, {"tolerance", p.tolerance}, {"passed", p.passed}};
      if (!p.note.empty()) e["note"] = p.note;
      out.push_back(std::move(e));
    }
    return out;
  }

  double tolerance() const { return tol_; }

 private:
  double tol_;
  std::vector<Property> props_;
  std::map<std::string, std::size_t> index_;
};

template <MarkovCategory C>
PointOf<C> origin(const Object& x) {
  if constexpr (std::is_same_v<PointOf<C>, gauss::Vector>)
    return gauss::Vector::Zero(static_cast<Eigen::Index>(x.dimension()));
  else
    return std::vector<std::size_t>(x.rank(), 0);
}

template <MarkovCategory C>
void verify_laws(Suite& suite, const HmmSpec<C>& hmm) {
  const std::size_t n = hmm.horizon();
  auto q = hmm.transition(0);
  for (std::size_t t = 0; t <= n; ++t) {
    if (t > 0) q = C::compose(q, hmm.transition(t));
    for (const auto& r : comonoid_laws<C>(hmm.state_space(t), hmm.observation_space(t))) suite.record(r.law, r.deviation);
    const auto laws = t < n ? composition_laws<C>(hmm.transition(t), hmm.transition(t + 1), hmm.observation(t + 1))
                            : composition_laws<C>(hmm.transition(t), hmm.observation(t),
                                                  C::identity(hmm.observation_space(t)));
    for (const auto& r : laws) suite.record(r.law, r.deviation);

    const std::size_t x[] = {0};
    const auto joint = C::branch(q, x, hmm.observation(t));
    const auto c = conditional_law<C>(joint, OutputPartition{{0}, {1}});
    suite.record(c.law, c.deviation);
    const auto b = bayes_inverse_law<C>(hmm.observation(t), q);
    suite.record(b.law, b.deviation);
    if (t < n) {
      const auto d = double_conditional_law<C>(C::branch(joint, x, hmm.transition(t + 1)));
      suite.record(d.law, d.deviation);
      const auto p = postcomposition_law<C>(joint, hmm.transition(t + 1));
      suite.record(p.law, p.deviation);
    }
    if (t > 0) {
      const auto point = C::point(hmm.state_space(t - 1), origin<C>(hmm.state_space(t - 1)));
      suite.record("point-determinism", determinism_defect<C>(point));
      const auto k = C::branch(hmm.transition(t), x, hmm.observation(t));
      const auto l = deterministic_precomposition_law<C>(k, point);
      suite.record(l.law, l.deviation);
    }
  }
}

template <class S>
void verify_markov_joint(Suite& suite, const finite::Kernel<S>& joint, bool hmm_layout) {
  MarkovCheckOptions options;
  options.tolerance = suite.tolerance();
  const auto props = hmm_layout ? std::vector{MarkovProperty::HmmBackward, MarkovProperty::HmmLocal, MarkovProperty::HmmGlobal}
                                : std::vector{MarkovProperty::ChainLocal, MarkovProperty::ChainGlobal};
  for (auto which : props) {
    const auto report = check_markov_properties(joint, which, options);
    suite.record(to_string(which), report.max_defect());
    if (!report.exhaustive) suite.check(std::string(to_string(which)) + "-sampled", true, "seeded subsample of statements");
  }
}

template <class D>
void verify_markov_model(Suite& suite, const HmmSpec<D>& hmm) {
  verify_markov_joint(suite, hmm_joint(hmm), true);
  verify_markov_joint(suite, chain_joint(hmm.chain), false);
}

/// Observation sequences for oracle suites: every sequence when there are
/// few, otherwise seeded simulations.
template <MarkovCategory C>
std::vector<std::vector<PointOf<C>>> oracle_sequences(const HmmSpec<C>& hmm, std::uint64_t seed) {
  std::vector<std::vector<PointOf<C>>> out;
  if constexpr (requires { typename C::Morphism::semiring; }) {
    Object ys;
    for (std::size_t t = 0; t <= hmm.horizon(); ++t) ys = ys * hmm.observation_space(t);
    if (ys.cardinality() <= 4096) {
      for (std::size_t flat = 0; flat < ys.cardinality(); ++flat) {
        std::vector<PointOf<C>> seq;
        for (auto v : finite::unflatten(ys, flat)) seq.push_back({v});
        out.push_back(std::move(seq));
      }
      return out;
    }
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 64; ++i) out.push_back(simulate(hmm, hmm.horizon(), rng).observations);
  return out;
}

template <MarkovCategory C>
std::vector<PointOf<C>> first(const std::vector<PointOf<C>>& seq, std::size_t count) {
  return std::vector<PointOf<C>>(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(count));
}

template <MarkovCategory C>
void verify_filter_oracle(Suite& suite, const HmmSpec<C>& hmm, std::uint64_t seed) {
  const std::size_t n = hmm.horizon();
  std::vector<MorphismOf<C>> batch, recursive;
  for (std::size_t t = 0; t <= n; ++t) {
    batch.push_back(filter_batch_kernel(hmm, t));
    recursive.push_back(filter_recursive_kernel(hmm, t));
  }
  std::size_t positive = 0;
  for (const auto& seq : oracle_sequences(hmm, seed)) {
    const auto run = filter_instantiated(hmm, seq);
    if (run.any_degenerate()) continue;
    ++positive;
    for (std::size_t t = 0; t <= n; ++t) {
      const auto y = join_points(first<C>(seq, t + 1));
      const auto oracle = instantiate<C>(batch[t], y);
      suite.record("instantiated-vs-batch", C::deviation(run.posterior(t), oracle));
      suite.record("recursive-vs-batch", C::deviation(instantiate<C>(recursive[t], y), oracle));
    }
    if constexpr (std::is_same_v<C, Gauss>) {
      const auto kalman = kalman_closed_form(hmm, seq);
      for (std::size_t t = 0; t <= n; ++t)
        suite.record("instantiated-vs-kalman",
                     Gauss::deviation(run.posterior(t), gauss::GaussMap::state(kalman[t].mean, kalman[t].cov)));
    }
  }
  suite.check("positive-sequences-found", positive > 0, std::to_string(positive) + " sequences compared");
}

template <MarkovCategory C>
void verify_smoother_oracle(Suite& suite, const HmmSpec<C>& hmm, std::uint64_t seed) {
  const std::size_t n = hmm.horizon();
  std::vector<MorphismOf<C>> batch;
  for (std::size_t t = 0; t <= n; ++t) batch.push_back(smoother_batch_kernel(hmm, t));
  std::size_t positive = 0;
  for (const auto& seq : oracle_sequences(hmm, seed)) {
    const auto filter = filter_instantiated(hmm, seq);
    if (filter.any_degenerate()) continue;
    ++positive;
    const auto fixed = fixed_interval_instantiated(hmm, filter);
    const auto y = join_points(seq);
    for (std::size_t t = 0; t <= n; ++t) {
      const auto oracle = instantiate<C>(batch[t], y);
      suite.record("fixed-interval-vs-batch", C::deviation(fixed.smoothed[t], oracle));
      if constexpr (requires { typename C::Morphism::semiring; }) {
        const auto fb = forward_backward_instantiated_all(hmm, seq);
        suite.record("forward-backward-vs-batch", C::deviation(fb.smoothed[t], oracle));
      } else {
        suite.record("filter-backward-vs-batch", C::deviation(smoother_from_filter(hmm, filter, seq, t).state, oracle));
      }
    }
    if constexpr (std::is_same_v<C, Gauss>) {
      const auto rts = rts_closed_form(hmm, kalman_closed_form(hmm, seq));
      for (std::size_t t = 0; t <= n; ++t) {
        suite.record("fixed-interval-vs-rts",
                     Gauss::deviation(fixed.smoothed[t], gauss::GaussMap::state(rts[t].mean, rts[t].cov)));
        const double excess = (rts[t].cov.diagonal() - filter.posterior(t).cov().diagonal()).maxCoeff();
        suite.record("smoothed-variance-not-above-filtered", std::max(0.0, excess), 1e-9);
      }
    }
  }
  suite.check("positive-sequences-found", positive > 0, std::to_string(positive) + " sequences compared");
}

void record_filter_chain(Suite& suite, const filterchain::FilterChainReport& r) {
  suite.record("filter-process-is-markov-chain", r.theorem_deviation);
  suite.record("lambda-coherence", r.lambda_defect);
  suite.record("observation-process-recursion", r.obs_joint_defect);
  suite.record("update-recursion", r.update_defect);
  suite.check("filter-process-chain-local", r.markov_local);
  if (r.close_atoms) suite.check("atlas-atoms-separated", false, "two atlas atoms lie within 10x the dedup tolerance");
}

template <MarkovCategory C>
Json run_verify(const Options& opt, const io::ModelFile& model, const HmmSpec<C>& hmm) {
  Suite suite(tolerance_for(opt, model.category));
  constexpr bool finite = requires { typename C::Morphism::semiring; };
  if (opt.suite == "laws") {
    verify_laws(suite, hmm);
  } else if (opt.suite == "markov") {
    if constexpr (finite)
      verify_markov_model(suite, hmm);
    else
      throw Unsupported("suite markov: unsupported instance " + model.category);
  } else if (opt.suite == "filter-oracle") {
    verify_filter_oracle(suite, hmm, opt.seed);
  } else if (opt.suite == "smoother-oracle") {
    verify_smoother_oracle(suite, hmm, opt.seed);
  } else if (opt.suite == "filter-chain") {
    if constexpr (finite) {
      if constexpr (std::is_same_v<C, FinStoch>)
        record_filter_chain(suite, filterchain::verify_filter_markov(hmm, suite.tolerance()));
      else
        record_filter_chain(suite, filterchain::verify_filter_markov(hmm));
    } else {
      throw Unsupported("suite filter-chain: unsupported instance " + model.category);
    }
  }
  return Json{{"suite", opt.suite}, {"tolerance", suite.tolerance()}, {"properties", suite.json()}, {"passed", suite.passed()}};
}

Json run_verify_joint(const Options& opt, const io::ModelFile& model, const io::JointFixture& fixture) {
  if (opt.suite != "markov") throw Unsupported("suite " + opt.suite + ": unsupported for joint fixtures");
  Suite suite(tolerance_for(opt, model.category));
  verify_markov_joint(suite, fixture.joint, fixture.layout == "hmm");
  return Json{{"suite", opt.suite}, {"tolerance", suite.tolerance()}, {"properties", suite.json()}, {"passed", suite.passed()}};
}

// ---------------------------------------------------------------------------

int dispatch(const std::string& command, const Options& opt) {
  const auto started = std::chrono::steady_clock::now();
  const bool with_obs = command == "filter" || command == "smooth";
  const Inputs in = load(opt, with_obs);
  Json report = header(command, in);
  Json body;
  std::visit(
      [&](const auto& spec) {
        using Spec = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<Spec, io::JointFixture>) {
          if (command != "verify") throw Unsupported(command + ": joint fixtures only support verify --suite markov");
          body = run_verify_joint(opt, in.model, spec);
        } else {
          if (command == "filter") body = run_filter(opt, in.model, spec);
          else if (command == "smooth") body = run_smooth(opt, in.model, spec);
          else if (command == "simulate") body = run_simulate(opt, spec);
          else body = run_verify(opt, in.model, spec);
        }
      },
      in.model.spec);
  for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
  if (opt.timing) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    report["timing_ms"] = std::chrono::duration<double, std::milli>(elapsed).count();
  }
  emit(opt, report);
  if (command == "verify" && !report.at("passed").get<bool>()) return kSuiteFailure;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"markovcat: Bayes filtering and smoothing in Markov categories"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model_path, "model file (JSON)")->required();
    sub->add_option("--out", opt.out_path, "report path (stdout if omitted)");
    sub->add_flag("--timing", opt.timing, "include wall-clock timing in the report");
  };

  auto* filter = app.add_subcommand("filter", "instantiated Bayes filter");
  add_common(filter);
  filter->add_option("--observations", opt.observations_path, "observations file (JSON)")->required();

  auto* smooth = app.add_subcommand("smooth", "Bayes smoother over the observed interval");
  add_common(smooth);
  smooth->add_option("--observations", opt.observations_path, "observations file (JSON)")->required();
  smooth->add_option("--method", opt.method, "forward-backward or fixed-interval");

  auto* sim = app.add_subcommand("simulate", "sample a trajectory and its observations");
  add_common(sim);
  sim->add_option("--seed", opt.seed, "random seed");
  sim->add_option("--steps", opt.steps, "last time index to simulate (default: horizon)");

  auto* verify = app.add_subcommand("verify", "run a property suite on a model");
  add_common(verify);
  verify->add_option("--suite", opt.suite, "laws, markov, filter-oracle, smoother-oracle or filter-chain")
      ->required()
      ->check(CLI::IsMember({"laws", "markov", "filter-oracle", "smoother-oracle", "filter-chain"}));
  verify->add_option("--seed", opt.seed, "seed for sampled observation sequences");
  verify->add_option("--tolerance", opt.tolerance, "comparison tolerance (overrides MARKOVCAT_TOLERANCE)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, opt);
  } catch (const ResourceError& e) {
    std::cerr << "markovcat: resource cap exceeded: " << e.what() << "\n";
    return kResourceError;
  } catch (const Unsupported& e) {
    std::cerr << "markovcat: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "markovcat: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "markovcat: input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "markovcat: error: " << e.what() << "\n";
    return kInputError;
  }
}
