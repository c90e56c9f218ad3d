#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "sffm/model_file.h"

namespace {

using nlohmann::json;

json TwoPhaseDoc() {
  return json::parse(R"({"schema": 1,
    "model": {"n": 2, "T": [[-2, 2], [1, -1]], "c": [1, -1], "r": [1, -1]},
    "init": {"lambda": 1, "nu0": [0.2, 0.6], "P": [0, 0.2]},
    "analysis": {"y": [1]}})");
}

TEST(ModelFile, RoundTrip) {
  const auto f = sffm::ParseModelFile(TwoPhaseDoc());
  const auto g = sffm::ParseModelFile(sffm::ToJson(f));
  EXPECT_EQ(sffm::ToJson(f), sffm::ToJson(g));
  EXPECT_EQ(sffm::ContentHash(f), sffm::ContentHash(g));
  EXPECT_EQ(sffm::ContentHash(f).size(), 16u);
  EXPECT_EQ(g.analysis["y"][0], 1);
  for (int k = 1; k <= 6; ++k) {
    const auto e = sffm::BuiltinExample(k);
    EXPECT_EQ(sffm::ToJson(sffm::ParseModelFile(sffm::ToJson(e))), sffm::ToJson(e));
  }
}

TEST(ModelFile, TandemMatchesExplicitModel) {
  const auto r = sffm::Resolve(sffm::BuiltinExample(1));
  const auto e = sffm::Resolve(sffm::ParseModelFile(TwoPhaseDoc()));
  EXPECT_TRUE(r.certified);
  EXPECT_FALSE(e.certified);
  EXPECT_LE((r.model.T() - e.model.T()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((r.init.nu0 - e.init.nu0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((r.init.point_mass - e.init.point_mass).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ModelFile, Errors) {
  json doc = TwoPhaseDoc();
  doc.erase("init");
  EXPECT_THROW(sffm::ParseModelFile(doc), std::invalid_argument);
  doc = TwoPhaseDoc();
  doc["model"]["n"] = 3;
  EXPECT_THROW(sffm::ParseModelFile(doc), std::invalid_argument);
  doc = TwoPhaseDoc();
  doc["model"]["T"] = json::parse("[[1, 2], [3]]");
  EXPECT_THROW(sffm::ParseModelFile(doc), std::invalid_argument);
  doc = TwoPhaseDoc();
  doc["schema"] = 2;
  EXPECT_THROW(sffm::ParseModelFile(doc), std::invalid_argument);
  EXPECT_THROW(sffm::BuiltinExample(7), std::invalid_argument);
  EXPECT_THROW(sffm::LoadModelFile("/nonexistent/model.json"), std::ios_base::failure);

  const std::string path = ::testing::TempDir() + "bad_model.json";
  std::ofstream(path) << "{not json";
  EXPECT_THROW(sffm::LoadModelFile(path), std::invalid_argument);
  std::remove(path.c_str());
}

TEST(ModelFile, TandemWithConflictingModel) {
  auto f = sffm::BuiltinExample(1);
  f.model = sffm::Resolve(sffm::BuiltinExample(2)).model;
  EXPECT_THROW(sffm::Resolve(f), std::invalid_argument);
}

}  // namespace
