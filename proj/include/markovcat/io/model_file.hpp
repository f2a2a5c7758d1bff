#pragma once

#include <string>
#include <variant>
#include <vector>

#include "markovcat/finite/finsetmulti.hpp"
#include "markovcat/finite/finstoch.hpp"
#include "markovcat/gauss/gauss.hpp"
#include "markovcat/io/json_text.hpp"
#include "markovcat/models.hpp"

namespace markovcat::io {

inline constexpr int kSchemaVersion = 1;

/// Malformed input file; `where` locates the offending field.
class InputError : public DomainError {
 public:
  InputError(const std::string& where, const std::string& msg)
      : DomainError(where + ": " + msg), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// A flat joint state over explicit factors, used as a Markov-property
/// fixture. layout is "hmm" (X_0, Y_0, X_1, ...) or "chain" (X_0, X_1, ...).
struct JointFixture {
  std::string layout;
  StochasticKernel joint;
};

struct ModelFile {
  std::string category;
  std::size_t horizon = 0;
  std::vector<std::string> state_names;
  std::vector<std::string> observation_names;
  std::variant<HmmSpec<FinStoch>, HmmSpec<FinSetMulti>, HmmSpec<Gauss>, JointFixture> spec;
};

namespace detail {

inline const Json& field(const Json& j, const std::string& where, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(where + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline std::vector<std::vector<double>> matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError(where, "expected a nonempty array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    out.push_back(numbers(j[r], where + "[" + std::to_string(r) + "]"));
    if (out.back().size() != out.front().size()) throw InputError(where, "rows have different lengths");
  }
  return out;
}

inline gauss::Matrix to_eigen(const std::vector<std::vector<double>>& rows, Eigen::Index cols) {
  gauss::Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  return m;
}

inline gauss::Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const gauss::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// A list of per-time entries, or a single entry reused for every time.
inline std::vector<Json> per_time(const Json& j, const std::string& where, std::size_t count, bool is_entry_array) {
  if (!is_entry_array && j.is_object()) return std::vector<Json>(count, j);
  if (!j.is_array() || j.empty()) throw InputError(where, "expected a nonempty list");
  // A single matrix given directly (finite instances) counts as one entry.
  const bool single = is_entry_array ? (j[0].is_array() && !j[0].empty() && j[0][0].is_number()) : false;
  std::vector<Json> entries;
  if (single) {
    entries.push_back(j);
  } else {
    for (const auto& e : j) entries.push_back(e);
  }
  if (entries.size() == 1) return std::vector<Json>(count, entries[0]);
  if (entries.size() != count)
    throw InputError(where, "expected " + std::to_string(count) + " entries (or one shared entry), got " +
                                std::to_string(entries.size()));
  return entries;
}

inline std::string time_label(const char* list, const char* symbol, std::size_t t) {
  return std::string(list) + "[" + symbol + "_" + std::to_string(t) + "]";
}

template <class Validate>
auto validated(const std::string& where, Validate&& build) {
  try {
    return build();
  } catch (const ValidationError& e) {
    throw InputError(where, e.what());
  } catch (const DomainError& e) {
    throw InputError(where, e.what());
  }
}

inline std::vector<std::vector<int>> to_int(const std::vector<std::vector<double>>& rows, const std::string& where) {
  std::vector<std::vector<int>> out;
  for (const auto& r : rows) {
    out.emplace_back();
    for (double v : r) {
      if (v != 0.0 && v != 1.0) throw InputError(where, "possibility entries must be 0 or 1");
      out.back().push_back(static_cast<int>(v));
    }
  }
  return out;
}

template <class C>
HmmSpec<C> parse_finite(const Json& j, std::size_t n) {
  HmmSpec<C> spec;
  const auto init = numbers(field(j, "model", "initial"), "initial");
  std::vector<std::vector<double>> init_rows;
  for (double v : init) init_rows.push_back({v});
  const auto transitions = n == 0 ? std::vector<Json>{} : per_time(field(j, "model", "transitions"), "transitions", n, true);
  const auto emissions = per_time(field(j, "model", "emissions"), "emissions", n + 1, true);

  auto make = [&](const std::vector<std::vector<double>>& rows, const Object& src, const Object& tgt,
                  const std::string& where) {
    return validated(where, [&] {
      if constexpr (std::is_same_v<C, FinStoch>)
        return finstoch::validate(rows, src, tgt);
      else
        return finsetmulti::validate(to_int(rows, where), src, tgt);
    });
  };
  spec.chain.kernels.push_back(make(init_rows, Object::unit(), Object{init.size()}, "initial (t=0)"));
  for (std::size_t t = 1; t <= n; ++t) {
    const std::string where = time_label("transitions", "f", t) + " (t=" + std::to_string(t) + ")";
    const auto rows = matrix(transitions[t - 1], where);
    spec.chain.kernels.push_back(make(rows, spec.chain.state_space(t - 1), Object{rows.size()}, where));
  }
  for (std::size_t t = 0; t <= n; ++t) {
    const std::string where = time_label("emissions", "g", t) + " (t=" + std::to_string(t) + ")";
    const auto rows = matrix(emissions[t], where);
    spec.observations.push_back(make(rows, spec.chain.state_space(t), Object{rows.size()}, where));
  }
  return spec;
}

inline gauss::GaussMap parse_affine(const Json& e, const Object& source, const std::string& where) {
  const auto offset = numbers(field(e, where, "offset"), where + ".offset");
  const auto d = static_cast<Eigen::Index>(offset.size());
  const auto n = static_cast<Eigen::Index>(source.dimension());
  const auto cov = matrix(field(e, where, "cov"), where + ".cov");
  if (cov.size() != offset.size() || cov.front().size() != offset.size())
    throw InputError(where + ".cov", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  gauss::Matrix a(d, n);
  if (n > 0) {
    const auto rows = matrix(field(e, where, "matrix"), where + ".matrix");
    if (rows.size() != offset.size() || rows.front().size() != static_cast<std::size_t>(n))
      throw InputError(where + ".matrix", "expected a " + std::to_string(d) + "x" + std::to_string(n) + " matrix");
    a = to_eigen(rows, n);
  }
  return validated(where, [&] {
    return gauss::GaussMap(source, Object{offset.size()}, a, to_eigen(offset),
                           to_eigen(cov, static_cast<Eigen::Index>(offset.size())));
  });
}

inline HmmSpec<Gauss> parse_gauss(const Json& j, std::size_t n) {
  HmmSpec<Gauss> spec;
  const auto& init = field(j, "model", "initial");
  Json as_affine = {{"offset", field(init, "initial", "mean")}, {"cov", field(init, "initial", "cov")}};
  spec.chain.kernels.push_back(parse_affine(as_affine, Object::unit(), "initial (t=0)"));
  const auto transitions = n == 0 ? std::vector<Json>{} : per_time(field(j, "model", "transitions"), "transitions", n, false);
  const auto emissions = per_time(field(j, "model", "emissions"), "emissions", n + 1, false);
  for (std::size_t t = 1; t <= n; ++t)
    spec.chain.kernels.push_back(parse_affine(transitions[t - 1], spec.chain.state_space(t - 1),
                                              time_label("transitions", "f", t) + " (t=" + std::to_string(t) + ")"));
  for (std::size_t t = 0; t <= n; ++t)
    spec.observations.push_back(parse_affine(emissions[t], spec.chain.state_space(t),
                                             time_label("emissions", "g", t) + " (t=" + std::to_string(t) + ")"));
  return spec;
}

inline JointFixture parse_joint(const Json& j) {
  JointFixture out;
  out.layout = field(j, "model", "layout").get<std::string>();
  if (out.layout != "hmm" && out.layout != "chain") throw InputError("layout", "expected \"hmm\" or \"chain\"");
  std::vector<std::size_t> factors;
  for (double v : numbers(field(j, "model", "factors"), "factors")) {
    if (v < 1 || v != std::floor(v)) throw InputError("factors", "factor sizes must be positive integers");
    factors.push_back(static_cast<std::size_t>(v));
  }
  const Object target(factors);
  FinStoch::check_oracle_cap(target);
  const auto probs = numbers(field(j, "model", "probabilities"), "probabilities");
  if (probs.size() != target.cardinality())
    throw InputError("probabilities", "expected " + std::to_string(target.cardinality()) + " entries");
  std::vector<std::vector<double>> rows;
  for (double p : probs) rows.push_back({p});
  out.joint = validated("probabilities", [&] { return finstoch::validate(rows, Object::unit(), target); });
  return out;
}

inline std::vector<std::string> names(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& a = j.at(key);
  if (!a.is_array()) throw InputError(key, "expected an array of strings");
  for (const auto& e : a) {
    if (!e.is_string()) throw InputError(key, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what, e.what());
  }
}

inline void check_schema_version(const Json& j, const std::string& what) {
  const auto& v = detail::field(j, what, "schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw InputError(what + ".schema_version", "unsupported schema version, expected " + std::to_string(kSchemaVersion));
}

inline ModelFile parse_model(const std::string& text) {
  const Json j = parse_json(text, "model");
  if (!j.is_object()) throw InputError("model", "expected a JSON object");
  check_schema_version(j, "model");
  ModelFile m;
  m.category = detail::field(j, "model", "category").get<std::string>();
  if (m.category == "joint") {
    m.spec = detail::parse_joint(j);
    const auto rank = std::get<JointFixture>(m.spec).joint.target().rank();
    m.horizon = std::get<JointFixture>(m.spec).layout == "hmm" ? rank / 2 - 1 : rank - 1;
    return m;
  }
  const auto& h = detail::field(j, "model", "horizon");
  if (!h.is_number_integer() || h.get<long long>() < 0) throw InputError("horizon", "expected a nonnegative integer");
  m.horizon = h.get<std::size_t>();
  m.state_names = detail::names(j, "state_names");
  m.observation_names = detail::names(j, "observation_names");
  if (m.category == "finstoch")
    m.spec = detail::parse_finite<FinStoch>(j, m.horizon);
  else if (m.category == "finsetmulti")
    m.spec = detail::parse_finite<FinSetMulti>(j, m.horizon);
  else if (m.category == "gauss")
    m.spec = detail::parse_gauss(j, m.horizon);
  else
    throw InputError("category", "unknown category \"" + m.category + "\"");
  std::visit(
      [&](const auto& s) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, JointFixture>)
          detail::validated("model", [&] {
            s.validate();
            return 0;
          });
      },
      m.spec);
  return m;
}

/// Observations y_0..y_k. Finite instances: integers; Gauss: vectors, or
/// plain numbers for one-dimensional observations.
template <class Point>
std::vector<Point> parse_observations(const std::string& text) {
  const Json j = parse_json(text, "observations");
  if (!j.is_object()) throw InputError("observations", "expected a JSON object");
  check_schema_version(j, "observations");
  const auto& list = detail::field(j, "observations", "observations");
  if (!list.is_array() || list.empty()) throw InputError("observations", "expected a nonempty array");
  std::vector<Point> out;
  for (std::size_t t = 0; t < list.size(); ++t) {
    const std::string where = "observations[" + std::to_string(t) + "]";
    const auto& e = list[t];
    if constexpr (std::is_same_v<Point, gauss::Vector>) {
      if (e.is_number())
        out.push_back(gauss::Vector::Constant(1, e.get<double>()));
      else
        out.push_back(detail::to_eigen(detail::numbers(e, where)));
    } else {
      if (!e.is_number_integer() || e.get<long long>() < 0) throw InputError(where, "expected a nonnegative integer");
      out.push_back({e.get<std::size_t>()});
    }
  }
  return out;
}

/// Checks that observations fit the model's observation spaces.
template <MarkovCategory C>
void check_observations_fit(const HmmSpec<C>& hmm, const std::vector<PointOf<C>>& obs) {
  if (obs.size() > hmm.horizon() + 1)
    throw InputError("observations", "got " + std::to_string(obs.size()) + " observations for horizon " +
                                         std::to_string(hmm.horizon()));
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto y = hmm.observation_space(t);
    const std::string where = "observations[" + std::to_string(t) + "]";
    if constexpr (std::is_same_v<PointOf<C>, gauss::Vector>) {
      if (static_cast<std::size_t>(obs[t].size()) != y.dimension())
        throw InputError(where, "expected dimension " + std::to_string(y.dimension()));
    } else {
      if (obs[t].at(0) >= y.cardinality())
        throw InputError(where, "value out of range for a space of size " + std::to_string(y.cardinality()));
    }
  }
}

}  // namespace markovcat::io
