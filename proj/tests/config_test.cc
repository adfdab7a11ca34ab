#include <gtest/gtest.h>

#include "binseg/config.h"
#include "binseg/datasetio.h"
#include "test_util.h"

namespace binseg {
namespace {

using nlohmann::json;

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.generation.lambda_fg = 5.0;
  c.generation.radius = {0.5, 0.8};
  c.generation.pose_weighting = PoseWeighting::kUniform;
  c.segmentation.euclidean.radius = 0.004;
  c.split.name = "val";
  c.jobs = 3;
  c.models_dir = "models";
  const RunConfig back = runConfigFromJson(toJson(c));
  EXPECT_EQ(toJson(back), toJson(c));
  EXPECT_EQ(back.generation.pose_weighting, PoseWeighting::kUniform);
  EXPECT_EQ(back.generation.radius.hi, 0.8);
}

TEST(RunConfig, PartialOverlayKeepsDefaults) {
  const RunConfig c = runConfigFromJson(json::parse(R"({"generation": {"max_fg": 4, "bin": {"width": 0.5}}})"));
  EXPECT_EQ(c.generation.max_fg, 4);
  EXPECT_EQ(c.generation.bin.width, 0.5);
  EXPECT_EQ(c.generation.bin.depth, 0.30);
  EXPECT_EQ(c.generation.lambda_fg, 7.5);
  EXPECT_EQ(c.render.far, 6.5);
}

TEST(RunConfig, ErrorsNameTheKey) {
  auto locate = [](const char* text) {
    try {
      runConfigFromJson(json::parse(text));
    } catch (const ParseError& e) {
      return e.location();
    }
    return std::string("no error");
  };
  EXPECT_EQ(locate(R"({"generation": {"lamda_fg": 3}})"), "/generation/lamda_fg");
  EXPECT_EQ(locate(R"({"generation": {"radius": [1]}})"), "/generation/radius");
  EXPECT_EQ(locate(R"({"generation": {"max_fg": 2.5}})"), "/generation/max_fg");
  EXPECT_EQ(locate(R"({"segmentation": {"euclidean": {"radius": "x"}}})"), "/segmentation/euclidean/radius");
  EXPECT_EQ(locate(R"({"generation": {"pose_weighting": "mass"}})"), "/generation/pose_weighting");
  EXPECT_EQ(locate(R"({"generation": {"master_seed": -1}})"), "/generation/master_seed");
  EXPECT_EQ(locate(R"([1])"), "/");
}

TEST(RunConfig, Validate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.jobs = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = RunConfig{};
  c.render.far = 10.0;  // 10 m does not fit 16-bit levels at 0.1 mm
  EXPECT_THROW(c.validate(), ArgumentError);
  c = RunConfig{};
  c.split.name = "test";
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(RunConfig, LoadResolvesModelsDirAgainstFile) {
  testing::TempDir dir;
  writeFile(dir / "run.json", R"({"models_dir": "meshes", "jobs": 2})");
  const RunConfig c = loadRunConfig(dir / "run.json");
  EXPECT_EQ(c.models_dir, dir.path() / "meshes");
  EXPECT_EQ(c.jobs, 2);
  writeFile(dir / "bad.json", "{");
  EXPECT_THROW(loadRunConfig(dir / "bad.json"), ParseError);
}

TEST(RunConfig, HashIgnoresMachineLocalFields) {
  RunConfig a, b;
  b.jobs = 8;
  b.models_dir = "/elsewhere";
  EXPECT_EQ(configHash(a), configHash(b));
  b.generation.master_seed = 1;
  EXPECT_NE(configHash(a), configHash(b));
}

TEST(RunConfig, ShippedDefaultsMatchBuiltIns) {
  const RunConfig shipped = loadRunConfig(BINSEG_SOURCE_DIR "/configs/default.json");
  json a = toJson(shipped), b = toJson(RunConfig{});
  a.erase("models_dir");
  b.erase("models_dir");
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace binseg
