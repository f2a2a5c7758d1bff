#include <gtest/gtest.h>

#include <filesystem>

#include "markovcat/io/json_text.hpp"
#include "markovcat/io/model_file.hpp"

using namespace markovcat;
using io::Json;

TEST(JsonText, SeventeenDigitsAndFlatArrays) {
  Json j;
  j["x"] = 0.1;
  j["v"] = Json::array({1.0, 2.5});
  j["n"] = 3;
  EXPECT_EQ(io::to_text(j), "{\n  \"x\": 0.10000000000000001,\n  \"v\": [1, 2.5],\n  \"n\": 3\n}\n");
}

TEST(JsonText, NonFiniteBecomesNull) {
  Json j = Json::array({std::numeric_limits<double>::infinity()});
  EXPECT_EQ(io::to_text(j), "[null]\n");
}

TEST(JsonText, DigestIsStable) {
  EXPECT_EQ(io::hex64(io::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(io::hex64(io::fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(JsonText, AtomicWriteReplacesFile) {
  const auto path = (std::filesystem::temp_directory_path() / "markovcat-io-test.json").string();
  io::write_file_atomic(path, "one");
  io::write_file_atomic(path, "two");
  EXPECT_EQ(io::read_file(path), "two");
  std::filesystem::remove(path);
  EXPECT_THROW(io::read_file(path), DomainError);
}

TEST(ModelFile, FiniteWithSharedKernels) {
  const auto m = io::parse_model(R"({"schema_version": 1, "category": "finstoch", "horizon": 2,
    "initial": [0.6, 0.4], "transitions": [[0.7, 0.3], [0.3, 0.7]], "emissions": [[0.9, 0.2], [0.1, 0.8]]})");
  EXPECT_EQ(m.category, "finstoch");
  const auto& hmm = std::get<HmmSpec<FinStoch>>(m.spec);
  EXPECT_EQ(hmm.horizon(), 2u);
  EXPECT_EQ(hmm.transition(2)(1, 0), 0.3);
  EXPECT_EQ(hmm.observation(1)(0, 1), 0.2);
}

TEST(ModelFile, ColumnSumErrorNamesTime) {
  try {
    io::parse_model(R"({"schema_version": 1, "category": "finstoch", "horizon": 1,
      "initial": [0.5, 0.5], "transitions": [[[0.8, 0.4], [0.3, 0.6]]], "emissions": [[1, 0], [0, 1]]})");
    FAIL();
  } catch (const io::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("t=1"), std::string::npos) << e.what();
  }
}

TEST(ModelFile, SchemaVersionAndCategoryChecked) {
  EXPECT_THROW(io::parse_model(R"({"schema_version": 2, "category": "finstoch"})"), io::InputError);
  EXPECT_THROW(io::parse_model(R"({"schema_version": 1, "category": "quantum"})"), io::InputError);
  EXPECT_THROW(io::parse_model("not json"), io::InputError);
}

TEST(ModelFile, GaussianModel) {
  const auto m = io::parse_model(R"({"schema_version": 1, "category": "gauss", "horizon": 1,
    "initial": {"mean": [0], "cov": [[1]]},
    "transitions": {"matrix": [[1]], "offset": [0.5], "cov": [[1]]},
    "emissions": {"matrix": [[2]], "offset": [0], "cov": [[1]]}})");
  const auto& hmm = std::get<HmmSpec<Gauss>>(m.spec);
  EXPECT_EQ(hmm.transition(1).mean()(0), 0.5);
  EXPECT_EQ(hmm.observation(0).matrix()(0, 0), 2.0);
}

TEST(ModelFile, JointFixture) {
  const auto m = io::parse_model(R"({"schema_version": 1, "category": "joint", "layout": "chain",
    "factors": [2, 2], "probabilities": [0.1, 0.2, 0.3, 0.4]})");
  const auto& j = std::get<io::JointFixture>(m.spec);
  EXPECT_EQ(j.layout, "chain");
  EXPECT_EQ(j.joint(2, 0), 0.3);
}

TEST(Observations, ParseAndFit) {
  const auto obs = io::parse_observations<std::vector<std::size_t>>(R"({"schema_version": 1, "observations": [0, 1]})");
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[1], (std::vector<std::size_t>{1}));
  const auto g = io::parse_observations<gauss::Vector>(R"({"schema_version": 1, "observations": [1.5, [2.0]]})");
  EXPECT_EQ(g[0](0), 1.5);
  EXPECT_THROW(io::parse_observations<std::vector<std::size_t>>(R"({"schema_version": 1, "observations": [-1]})"),
               io::InputError);
}
