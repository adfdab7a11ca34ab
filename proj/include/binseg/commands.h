#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binseg/cocoeval.h"
#include "binseg/config.h"
#include "binseg/pipeline.h"
#include "binseg/segbase.h"

namespace binseg {

// Thread-safe line logger: "level: message key=value ..." or, in JSON mode,
// one object per line.
class Logger {
 public:
  Logger(std::ostream& out, bool json, bool quiet = false);
  void info(const std::string& msg, const nlohmann::json& fields = nlohmann::json::object());
  void warn(const std::string& msg, const nlohmann::json& fields = nlohmann::json::object());

 private:
  void write(const char* level, const std::string& msg, const nlohmann::json& fields);
  std::ostream* out_;
  bool json_, quiet_;
  std::mutex mu_;
};

inline constexpr const char* kConfigEnvVar = "BINSEG_CONFIG";

// Explicit path, else $BINSEG_CONFIG, else built-in defaults.
RunConfig resolveRunConfig(const std::optional<std::filesystem::path>& path);

SegMethod parseSegMethod(const std::string& name);
std::string segMethodName(SegMethod m);

struct GenerateArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> models;
  std::size_t count = 0;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::optional<int> jobs;
};
DatasetManifest cmdGenerate(const GenerateArgs& args, Logger& log);

struct SegmentArgs {
  std::filesystem::path dataset;
  SegMethod method = SegMethod::kEuclidean;
  std::optional<std::filesystem::path> params;
  std::filesystem::path out;
  int jobs = 1;
};
std::vector<Prediction> cmdSegment(const SegmentArgs& args, Logger& log);

// Segments the first `limit` images of a dataset (all when limit is empty).
std::vector<Prediction> segmentDataset(const std::filesystem::path& dir,
                                       const LoadedDataset& data,
                                       const SegParams& params, SegMethod method,
                                       int jobs, std::optional<std::size_t> limit = {});

// Segmentation parameters from a file holding either a bare parameter
// object or a document with a "segmentation" section.
SegParams loadSegParams(const std::filesystem::path& path, const SegParams& base);

struct EvaluateArgs {
  std::filesystem::path ground_truth;  // annotations.json or dataset directory
  std::filesystem::path predictions;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> pr_csv;
  double pr_iou = 0.5;
  int max_detections = 100;
};
EvalReport cmdEvaluate(const EvaluateArgs& args, Logger& log, std::ostream& table);

nlohmann::json reportToJson(const EvalReport& r);
std::vector<GroundTruth> groundTruthOf(const AnnotationSet& set);

struct StatsArgs {
  std::filesystem::path dataset;
  std::filesystem::path out;
};
DatasetStats cmdStats(const StatsArgs& args, Logger& log);
nlohmann::json statsToJson(const DatasetStats& s);
std::string histogramCsv(const Histogram& h);

struct TuneArgs {
  std::filesystem::path dataset;
  SegMethod method = SegMethod::kEuclidean;
  std::filesystem::path grid;
  std::size_t images = 10;
  std::optional<std::filesystem::path> out;
  int jobs = 1;
};
struct TuneResult {
  SegParams best;
  double best_ap50 = -1;
  nlohmann::json trials = nlohmann::json::array();
};
// Grid file: {"euclidean.radius": [0.002, 0.003], ...}; keys are dotted
// paths into the segmentation parameters. The first combination with the
// highest AP@0.5 wins.
TuneResult cmdTune(const TuneArgs& args, Logger& log);

struct SplitArgs {
  std::filesystem::path models;
  double fraction = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;
};
ObjectSplit cmdSplit(const SplitArgs& args, Logger& log, std::ostream& stdout_stream);

struct MakeModelsArgs {
  std::filesystem::path out;
  int count = 60;
  std::uint64_t seed = 0;
};
void cmdMakeModels(const MakeModelsArgs& args, Logger& log);

// Parses argv and runs a subcommand. Returns the process exit code:
// 0 success, 1 usage error, 2 data error, 3 internal error.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace binseg
