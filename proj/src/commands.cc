#include "binseg/commands.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "binseg/primitives.h"

namespace binseg {

namespace fs = std::filesystem;
using nlohmann::json;

Logger::Logger(std::ostream& out, bool json, bool quiet) : out_(&out), json_(json), quiet_(quiet) {}

void Logger::info(const std::string& msg, const json& fields) { write("info", msg, fields); }
void Logger::warn(const std::string& msg, const json& fields) { write("warn", msg, fields); }

void Logger::write(const char* level, const std::string& msg, const json& fields) {
  if (quiet_ && std::string_view(level) == "info") return;
  std::ostringstream line;
  if (json_) {
    json j = fields;
    j["level"] = level;
    j["msg"] = msg;
    line << j.dump();
  } else {
    line << level << ": " << msg;
    for (const auto& [k, v] : fields.items())
      line << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
  }
  line << '\n';
  std::lock_guard<std::mutex> lock(mu_);
  *out_ << line.str() << std::flush;
}

RunConfig resolveRunConfig(const std::optional<fs::path>& path) {
  if (path) return loadRunConfig(*path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return loadRunConfig(env);
  return RunConfig{};
}

SegMethod parseSegMethod(const std::string& name) {
  if (name == "euclidean") return SegMethod::kEuclidean;
  if (name == "region_growing") return SegMethod::kRegionGrowing;
  throw ArgumentError("unknown method: " + name + " (expected euclidean or region_growing)");
}

std::string segMethodName(SegMethod m) {
  return m == SegMethod::kEuclidean ? "euclidean" : "region_growing";
}

// ---- generate ---------------------------------------------------------------

DatasetManifest cmdGenerate(const GenerateArgs& args, Logger& log) {
  RunConfig config = resolveRunConfig(args.config);
  if (args.models) config.models_dir = *args.models;
  if (args.seed) config.generation.master_seed = *args.seed;
  if (args.jobs) config.jobs = *args.jobs;
  if (config.models_dir.empty()) throw ArgumentError("no model directory (set models_dir or --models)");
  if (!fs::is_directory(config.models_dir))
    throw ArgumentError("model directory not found: " + config.models_dir.string());
  config.validate();

  const ModelDatabase db = ModelDatabase::loadDirectory(config.models_dir, config.generation.pose_weighting);
  log.info("loaded models", {{"count", db.size()}, {"dir", config.models_dir.string()}});

  DatasetWriteOptions opts;
  opts.count = args.count;
  opts.jobs = config.jobs;
  opts.on_scene = [&](const SceneResult& s) {
    json fields = {{"index", s.index},
                   {"objects", s.state.foreground.size()},
                   {"instances", s.masks.size()},
                   {"seconds", s.seconds}};
    if (s.log.placement_failures) fields["placement_failures"] = s.log.placement_failures;
    log.info("scene", fields);
    for (const auto& w : s.log.warnings) log.warn(w, {{"index", s.index}});
  };
  const auto start = std::chrono::steady_clock::now();
  DatasetManifest m = writeDataset(config, db, args.out, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log.info("dataset written", {{"out", args.out.string()},
                               {"images", m.num_images},
                               {"instances", m.num_instances},
                               {"seconds", secs}});
  return m;
}

// ---- segment ----------------------------------------------------------------

SegParams loadSegParams(const fs::path& path, const SegParams& base) {
  json doc;
  try {
    doc = json::parse(readFile(path));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), path.string());
  }
  try {
    if (doc.is_object() && doc.contains("segmentation")) return segParamsFromJson(doc["segmentation"], base);
    return segParamsFromJson(doc, base);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), path.string());
  }
}

std::vector<Prediction> segmentDataset(const fs::path& dir, const LoadedDataset& data,
                                       const SegParams& params, SegMethod method, int jobs,
                                       std::optional<std::size_t> limit) {
  params.validate();
  const auto& images = data.annotations.images;
  const std::size_t n = limit ? std::min(*limit, images.size()) : images.size();
  const RenderSettings render = data.config.renderSettings();
  std::vector<std::vector<Prediction>> per_image(n);
  parallelFor(n, jobs, [&](std::size_t i) {
    const AnnotatedImage& info = images[i];
    if (!info.camera) throw DataError("image " + std::to_string(info.id) + " has no camera");
    const DepthImage depth = loadDepthImage(dir, info, data.manifest.depth_scale);
    const DepthImage background = renderEmptyBin(data.config.generation, *info.camera, render);
    for (auto& m : segment(depth, *info.camera, background, params, method))
      per_image[i].push_back({info.id, std::move(m.mask), m.score});
  });
  std::vector<Prediction> out;
  for (auto& v : per_image)
    for (auto& p : v) out.push_back(std::move(p));
  return out;
}

std::vector<Prediction> cmdSegment(const SegmentArgs& args, Logger& log) {
  const LoadedDataset data = loadDataset(args.dataset);
  SegParams params = data.config.segmentation;
  if (args.params) params = loadSegParams(*args.params, params);
  const auto start = std::chrono::steady_clock::now();
  std::vector<Prediction> preds = segmentDataset(args.dataset, data, params, args.method, args.jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  writeFile(args.out, writePredictions(preds));
  log.info("segmentation written", {{"method", segMethodName(args.method)},
                                    {"images", data.annotations.images.size()},
                                    {"predictions", preds.size()},
                                    {"seconds", secs},
                                    {"out", args.out.string()}});
  return preds;
}

// ---- evaluate ---------------------------------------------------------------

std::vector<GroundTruth> groundTruthOf(const AnnotationSet& set) {
  std::vector<GroundTruth> gts;
  for (const auto& img : set.images)
    for (const auto& inst : img.instances) gts.push_back({img.id, inst.mask});
  return gts;
}

namespace {

std::string thresholdKey(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", iouThreshold(i));
  return buf;
}

}  // namespace

json reportToJson(const EvalReport& r) {
  json per_ap = json::object(), per_ar = json::object();
  for (int i = 0; i < kNumIouThresholds; ++i) {
    per_ap[thresholdKey(i)] = r.ap_per_threshold[i];
    per_ar[thresholdKey(i)] = r.recall_per_threshold[i];
  }
  return {{"ap", r.ap},
          {"ap50", r.ap50},
          {"ap75", r.ap75},
          {"ar100", r.ar100},
          {"ap_per_threshold", per_ap},
          {"recall_per_threshold", per_ar},
          {"num_images", r.num_images},
          {"num_gt", r.num_gt},
          {"num_predictions", r.num_predictions}};
}

EvalReport cmdEvaluate(const EvaluateArgs& args, Logger& log, std::ostream& table) {
  const fs::path gt_path =
      fs::is_directory(args.ground_truth) ? args.ground_truth / "annotations.json" : args.ground_truth;
  const AnnotationSet set = readAnnotations(readFile(gt_path));
  std::vector<Prediction> preds = readPredictions(readFile(args.predictions));

  std::set<std::int64_t> image_ids;
  for (const auto& img : set.images) image_ids.insert(img.id);
  std::map<std::int64_t, std::pair<int, int>> sizes;
  for (const auto& img : set.images) sizes[img.id] = {img.width, img.height};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto it = sizes.find(preds[i].image_id);
    if (it == sizes.end())
      throw DataError("prediction " + std::to_string(i) + " references unknown image " +
                      std::to_string(preds[i].image_id));
    if (preds[i].mask.width() != it->second.first || preds[i].mask.height() != it->second.second)
      throw DataError("prediction " + std::to_string(i) + " mask size does not match its image");
  }

  EvalOptions opts;
  opts.max_detections = args.max_detections;
  const std::vector<GroundTruth> gts = groundTruthOf(set);
  EvalReport r = evaluate(preds, gts, opts);
  r.num_images = set.images.size();

  table << std::fixed << std::setprecision(4);
  table << "AP      " << r.ap << "\nAP@0.50 " << r.ap50 << "\nAP@0.75 " << r.ap75 << "\nAR@"
        << args.max_detections << "  " << r.ar100 << "\n";
  table << "IoU     AP      recall\n";
  for (int i = 0; i < kNumIouThresholds; ++i)
    table << thresholdKey(i) << "    " << r.ap_per_threshold[i] << "  " << r.recall_per_threshold[i] << "\n";
  table << std::defaultfloat;

  if (args.out) writeFile(*args.out, reportToJson(r).dump(1) + "\n");
  if (args.pr_csv) {
    std::ostringstream csv;
    csv << std::setprecision(17) << "rank,recall,precision\n";
    const auto curve = prCurve(preds, gts, args.pr_iou, opts);
    for (std::size_t i = 0; i < curve.size(); ++i)
      csv << i << ',' << curve[i].recall << ',' << curve[i].precision << '\n';
    writeFile(*args.pr_csv, csv.str());
  }
  log.info("evaluation", {{"ap", r.ap}, {"ap50", r.ap50}, {"ar100", r.ar100}, {"num_gt", r.num_gt}});
  return r;
}

// ---- stats ------------------------------------------------------------------

json statsToJson(const DatasetStats& s) {
  auto hist = [](const Histogram& h) { return json{{"edges", h.edges}, {"counts", h.counts}}; };
  return {{"num_images", s.num_images},
          {"num_instances", s.num_instances},
          {"mean_instances_per_image", s.mean_instances_per_image},
          {"mean_area_fraction", s.mean_area_fraction},
          {"instances_per_image", hist(s.instances_per_image)},
          {"area_fraction", hist(s.area_fraction)}};
}

std::string histogramCsv(const Histogram& h) {
  std::ostringstream csv;
  csv << std::setprecision(17) << "lo,hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    csv << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  return csv.str();
}

DatasetStats cmdStats(const StatsArgs& args, Logger& log) {
  const LoadedDataset data = loadDataset(args.dataset);
  std::vector<ImageInstances> images;
  for (const auto& img : data.annotations.images) {
    ImageInstances ii{img.width, img.height, {}};
    for (const auto& inst : img.instances) ii.areas.push_back(inst.mask.area());
    images.push_back(std::move(ii));
  }
  const DatasetStats s = datasetStats(images);
  fs::create_directories(args.out);
  writeFile(args.out / "stats.json", statsToJson(s).dump(1) + "\n");
  writeFile(args.out / "instances_per_image.csv", histogramCsv(s.instances_per_image));
  writeFile(args.out / "area_fraction.csv", histogramCsv(s.area_fraction));
  log.info("stats", {{"images", s.num_images},
                     {"mean_instances_per_image", s.mean_instances_per_image},
                     {"mean_area_fraction", s.mean_area_fraction}});
  return s;
}

// ---- tune -------------------------------------------------------------------

TuneResult cmdTune(const TuneArgs& args, Logger& log) {
  const LoadedDataset data = loadDataset(args.dataset);
  json grid;
  try {
    grid = json::parse(readFile(args.grid));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), args.grid.string());
  }
  if (!grid.is_object() || grid.empty()) throw ParseError("expected non-empty object", args.grid.string());
  std::vector<std::pair<json::json_pointer, json>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty())
      throw ParseError("expected non-empty array", args.grid.string() + ": /" + key);
    std::string ptr = "/" + key;
    for (auto& c : ptr)
      if (c == '.') c = '/';
    axes.emplace_back(json::json_pointer(ptr), values);
  }

  const std::size_t n = std::min(args.images, data.annotations.images.size());
  AnnotationSet subset;
  subset.images.assign(data.annotations.images.begin(), data.annotations.images.begin() + n);
  const std::vector<GroundTruth> gts = groundTruthOf(subset);

  TuneResult result;
  std::vector<std::size_t> pos(axes.size(), 0);
  for (;;) {
    json params = toJson(data.config.segmentation);
    json trial = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (!params.contains(axes[a].first))
        throw ParseError("unknown parameter", args.grid.string() + ": " + axes[a].first.to_string());
      params[axes[a].first] = axes[a].second[pos[a]];
      trial[axes[a].first.to_string()] = axes[a].second[pos[a]];
    }
    const SegParams p = segParamsFromJson(params);
    const std::vector<Prediction> preds = segmentDataset(args.dataset, data, p, args.method, args.jobs, n);
    const double ap50 = averagePrecision(preds, gts, {0.5})[0];
    result.trials.push_back({{"params", trial}, {"ap50", ap50}});
    log.info("trial", {{"params", trial}, {"ap50", ap50}});
    if (ap50 > result.best_ap50) {
      result.best_ap50 = ap50;
      result.best = p;
    }
    // Odometer step; the last axis varies fastest.
    bool done = true;
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++pos[a] < axes[a].second.size()) {
        done = false;
        break;
      }
      pos[a] = 0;
    }
    if (done) break;
  }
  if (args.out) {
    json doc = {{"method", segMethodName(args.method)},
                {"images", n},
                {"ap50", result.best_ap50},
                {"segmentation", toJson(result.best)},
                {"trials", result.trials}};
    writeFile(*args.out, doc.dump(1) + "\n");
  }
  log.info("best", {{"ap50", result.best_ap50}, {"segmentation", toJson(result.best)}});
  return result;
}

// ---- split / make-models ----------------------------------------------------

ObjectSplit cmdSplit(const SplitArgs& args, Logger& log, std::ostream& stdout_stream) {
  if (!(args.fraction > 0 && args.fraction < 1)) throw ArgumentError("fraction must lie in (0, 1)");
  const ModelDatabase db = ModelDatabase::loadDirectory(args.models);
  if (db.size() < 2) throw DataError("need at least two models to split");
  ObjectSplit s = splitObjects(db.ids(), args.fraction, args.seed);
  const json doc = {{"fraction", args.fraction}, {"seed", args.seed}, {"train", s.train}, {"val", s.val}};
  if (args.out) {
    writeFile(*args.out, doc.dump(1) + "\n");
  } else {
    stdout_stream << doc.dump(1) << "\n";
  }
  log.info("split", {{"train", s.train.size()}, {"val", s.val.size()}});
  return s;
}

void cmdMakeModels(const MakeModelsArgs& args, Logger& log) {
  if (args.count < 1) throw ArgumentError("count must be >= 1");
  writeModelCorpus(args.out, args.count, args.seed);
  log.info("models written", {{"count", args.count}, {"out", args.out.string()}});
}

// ---- CLI --------------------------------------------------------------------

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic depth-image heap datasets, geometric segmentation baselines and COCO mask evaluation",
               "binseg"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  bool log_json = false, quiet = false;
  app.add_flag("--log-json", log_json, "Line-delimited JSON logs on stderr");
  app.add_flag("-q,--quiet", quiet, "Only warnings");

  GenerateArgs gen;
  std::string gen_config, gen_models;
  std::uint64_t gen_seed = 0;
  int gen_jobs = 1;
  auto* g = app.add_subcommand("generate", "Generate a dataset");
  g->add_option("config", gen_config, "Run config JSON (default: $BINSEG_CONFIG or built-in defaults)");
  g->add_option("--models", gen_models, "Model directory (overrides models_dir)");
  g->add_option("--count", gen.count, "Number of scenes")->required();
  auto* seed_opt = g->add_option("--seed", gen_seed, "Master seed (overrides the config)");
  g->add_option("--out", gen.out, "Output directory")->required();
  auto* jobs_opt = g->add_option("--jobs", gen_jobs, "Worker threads")->check(CLI::PositiveNumber);

  SegmentArgs seg;
  std::string seg_method = "euclidean", seg_params;
  auto* s = app.add_subcommand("segment", "Run a segmentation baseline on a dataset");
  s->add_option("dataset", seg.dataset, "Dataset directory")->required();
  s->add_option("--method", seg_method, "euclidean or region_growing");
  s->add_option("--params", seg_params, "Segmentation parameter JSON");
  s->add_option("--out", seg.out, "Predictions JSON")->required();
  s->add_option("--jobs", seg.jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  std::string ev_out, ev_csv;
  auto* e = app.add_subcommand("evaluate", "COCO mask evaluation");
  e->add_option("ground_truth", ev.ground_truth, "annotations.json or dataset directory")->required();
  e->add_option("predictions", ev.predictions, "Predictions JSON")->required();
  e->add_option("--out", ev_out, "Report JSON");
  e->add_option("--pr-csv", ev_csv, "Precision-recall operating points CSV");
  e->add_option("--pr-iou", ev.pr_iou, "IoU threshold of the PR curve")->check(CLI::Range(0.0, 1.0));
  e->add_option("--max-detections", ev.max_detections, "Detections per image")->check(CLI::PositiveNumber);

  StatsArgs st;
  auto* t = app.add_subcommand("stats", "Dataset statistics");
  t->add_option("dataset", st.dataset, "Dataset directory")->required();
  t->add_option("--out", st.out, "Output directory")->required();

  TuneArgs tu;
  std::string tu_method = "euclidean", tu_out;
  auto* u = app.add_subcommand("tune", "Grid-search segmentation parameters");
  u->add_option("dataset", tu.dataset, "Dataset directory")->required();
  u->add_option("--method", tu_method, "euclidean or region_growing");
  u->add_option("--grid", tu.grid, "Grid JSON")->required();
  u->add_option("--images", tu.images, "Leading images used")->check(CLI::PositiveNumber);
  u->add_option("--out", tu_out, "Result JSON (usable as --params)");
  u->add_option("--jobs", tu.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SplitArgs sp;
  std::string sp_out;
  auto* p = app.add_subcommand("split", "Train/val object split");
  p->add_option("models", sp.models, "Model directory")->required();
  p->add_option("--fraction", sp.fraction, "Training fraction");
  p->add_option("--seed", sp.seed, "Shuffle seed");
  p->add_option("--out", sp_out, "Output JSON (default: stdout)");

  std::string cfg_path;
  auto* c = app.add_subcommand("config", "Print the resolved run config");
  c->add_option("config", cfg_path, "Run config JSON (default: $BINSEG_CONFIG or built-in defaults)");

  MakeModelsArgs mm;
  auto* m = app.add_subcommand("make-models", "Write a procedural model corpus");
  m->add_option("--out", mm.out, "Output directory")->required();
  m->add_option("--count", mm.count, "Number of models")->check(CLI::PositiveNumber);
  m->add_option("--seed", mm.seed, "Corpus seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& ex) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }

  Logger log(err, log_json, quiet);
  try {
    if (g->parsed()) {
      if (!gen_config.empty()) gen.config = gen_config;
      if (!gen_models.empty()) gen.models = gen_models;
      if (seed_opt->count()) gen.seed = gen_seed;
      if (jobs_opt->count()) gen.jobs = gen_jobs;
      cmdGenerate(gen, log);
    } else if (s->parsed()) {
      seg.method = parseSegMethod(seg_method);
      if (!seg_params.empty()) seg.params = seg_params;
      cmdSegment(seg, log);
    } else if (e->parsed()) {
      if (!ev_out.empty()) ev.out = ev_out;
      if (!ev_csv.empty()) ev.pr_csv = ev_csv;
      cmdEvaluate(ev, log, out);
    } else if (t->parsed()) {
      cmdStats(st, log);
    } else if (u->parsed()) {
      tu.method = parseSegMethod(tu_method);
      if (!tu_out.empty()) tu.out = tu_out;
      cmdTune(tu, log);
    } else if (p->parsed()) {
      if (!sp_out.empty()) sp.out = sp_out;
      cmdSplit(sp, log, out);
    } else if (c->parsed()) {
      std::optional<fs::path> path;
      if (!cfg_path.empty()) path = cfg_path;
      const RunConfig rc = resolveRunConfig(path);
      rc.validate();
      out << toJson(rc).dump(1) << "\n";
    } else if (m->parsed()) {
      cmdMakeModels(mm, log);
    }
    return 0;
  } catch (const ArgumentError& ex) {
    log.warn(std::string("usage error: ") + ex.what());
    return 1;
  } catch (const Error& ex) {
    log.warn(std::string("data error: ") + ex.what());
    return 2;
  } catch (const fs::filesystem_error& ex) {
    log.warn(std::string("data error: ") + ex.what());
    return 2;
  } catch (const std::exception& ex) {
    log.warn(std::string("internal error: ") + ex.what());
    return 3;
  }
}

}  // namespace binseg
