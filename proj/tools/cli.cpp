// Copyright 2026 The dtrsum Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "dtrsum/checkpoint.hpp"
#include "dtrsum/io.hpp"
#include "dtrsum/model_gradcheck.hpp"
#include "dtrsum/synth.hpp"
#include "dtrsum/training.hpp"
#include "visualize.hpp"

namespace dtrsum::tools {

using json = nlohmann::ordered_json;

std::string ScoresCsv(const ScoreTable& table) {
  std::string out = "video_id,frame_index,score\n";
  char buf[64];
  for (const auto& [id, scores] : table) {
    for (std::size_t t = 0; t < scores.size(); ++t) {
      std::snprintf(buf, sizeof(buf), ",%zu,%.17g\n", t, scores[t]);
      out += id;
      out += buf;
    }
  }
  return out;
}

ScoreTable ParseScoresCsv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "video_id,frame_index,score") {
    throw FormatError(FormatErrorKind::kMalformed,
                      source + ": expected header 'video_id,frame_index,score'");
  }
  ScoreTable table;
  std::map<std::string, std::size_t> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw FormatError(FormatErrorKind::kMalformed,
                        source + ":" + std::to_string(lineno) + ": expected three fields");
    }
    const std::string id = line.substr(0, c1);
    std::size_t frame = 0;
    double score = 0.0;
    try {
      frame = std::stoul(line.substr(c1 + 1, c2 - c1 - 1));
      score = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw FormatError(FormatErrorKind::kMalformed,
                        source + ":" + std::to_string(lineno) + ": bad number");
    }
    if (table.empty() || table.back().first != id) {
      if (seen.count(id)) {
        throw FormatError(FormatErrorKind::kMalformed,
                          source + ": rows for video '" + id + "' are not contiguous");
      }
      seen[id] = table.size();
      table.push_back({id, {}});
    }
    auto& scores = table.back().second;
    if (frame != scores.size()) {
      throw FormatError(FormatErrorKind::kMalformed,
                        source + ":" + std::to_string(lineno) + ": expected frame " +
                            std::to_string(scores.size()) + " of '" + id + "', got " +
                            std::to_string(frame));
    }
    scores.push_back(score);
  }
  return table;
}

namespace {

bool Quiet() {
  const char* level = std::getenv("DTRSUM_LOG");
  return level != nullptr && std::string(level) == "quiet";
}

std::vector<std::size_t> ParseSizeList(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v <= 0) {
      throw ValidationError(what + ": '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

HoleSet ParseHoles(const std::string& text) {
  const auto values = ParseSizeList(text, "holes");
  if (values.size() != kUnitsPerLayer) {
    throw ValidationError("holes needs exactly " + std::to_string(kUnitsPerLayer) +
                          " sizes, got " + std::to_string(values.size()));
  }
  HoleSet holes{};
  for (std::size_t i = 0; i < values.size(); ++i) holes[i] = static_cast<int>(values[i]);
  return holes;
}

std::string JoinHoles(const HoleSet& holes) {
  std::string s;
  for (std::size_t i = 0; i < holes.size(); ++i) s += (i ? "," : "") + std::to_string(holes[i]);
  return s;
}

KeyframeRule ParseRule(const std::string& name) {
  if (name == "at-least-one") return KeyframeRule::kAtLeastOne;
  if (name == "more-than-one") return KeyframeRule::kMoreThanOne;
  throw ValidationError("unknown keyframe rule '" + name +
                        "' (expected at-least-one or more-than-one)");
}

const char* RuleName(KeyframeRule rule) {
  return rule == KeyframeRule::kAtLeastOne ? "at-least-one" : "more-than-one";
}

InitScheme ParseInit(const std::string& name) {
  if (name == "random") return InitScheme::kRandom;
  if (name == "zero") return InitScheme::kZero;
  throw ValidationError("unknown init scheme '" + name + "' (expected random or zero)");
}

fs::path WithSuffix(const fs::path& path, const std::string& suffix) {
  return path.string() + suffix;
}

void EchoConfig(const json& config, std::ostream& out, const fs::path* persist) {
  out << "resolved config: " << config.dump() << "\n";
  if (persist != nullptr) WriteTextFile(*persist, config.dump(2) + "\n");
}

// Evaluation flags shared by train, eval and visualize.
struct EvalFlags {
  double budget = 0.15;
  std::size_t kts_max_segments = 0;
  double kts_penalty = -1.0;
  std::string rule = "at-least-one";

  void Register(CLI::App* app) {
    app->add_option("--budget", budget, "Summary length as a fraction of the video");
    app->add_option("--kts-max-segments", kts_max_segments,
                    "Upper bound on KTS segments (0 = T/10)");
    app->add_option("--kts-penalty", kts_penalty,
                    "KTS per-segment penalty (negative = automatic)");
    app->add_option("--keyframe-rule", rule,
                    "Segments qualifying as reference keyshots: at-least-one | more-than-one");
  }
  EvalConfig Resolve() const {
    EvalConfig c;
    c.budget_fraction = budget;
    c.kts_max_segments = kts_max_segments;
    c.kts_penalty = kts_penalty;
    c.keyframe_rule = ParseRule(rule);
    if (!(budget >= 0.0 && budget <= 1.0)) throw ValidationError("budget must lie in [0, 1]");
    return c;
  }
  json ToJson() const {
    return {{"budget", budget},
            {"kts_max_segments", kts_max_segments},
            {"kts_penalty", kts_penalty},
            {"keyframe_rule", rule}};
  }
};

// ---------------------------------------------------------------------------

struct SynthCommand {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  void Register(CLI::App* app) {
    app->add_option("--spec", spec_path, "Synthetic spec JSON (defaults when omitted)");
    app->add_option("--out", out_dir, "Output directory")->required();
    app->add_option("--seed", seed, "Override the spec seed");
  }

  int Run(std::ostream& out) {
    SyntheticSpec spec;
    if (!spec_path.empty()) spec = ParseSyntheticSpec(ReadTextFile(spec_path), spec_path);
    if (seed) spec.seed = *seed;
    spec.Validate();
    json config = {{"command", "synth"},
                   {"out", out_dir},
                   {"spec", json::parse(SerializeSyntheticSpec(spec))}};
    fs::create_directories(out_dir);
    const fs::path persist = fs::path(out_dir) / "config.json";
    EchoConfig(config, out, &persist);
    const DatasetManifest manifest = SynthDataset(spec, out_dir);
    out << "wrote " << manifest.videos.size() << " videos ("
        << manifest.train_ids.size() << " train, " << manifest.test_ids.size()
        << " test) to " << (fs::path(out_dir) / "manifest.json").string() << "\n";
    return kExitOk;
  }
};

struct TrainCommand {
  std::string data;
  std::string out_path;
  std::string final_out;
  std::string metrics;
  std::string holes = "1,4,16,64";
  std::string mode = "three-player";
  std::string init = "random";
  std::string validation = "test";
  std::string head_widths = "512,256,128";
  bool no_supervised = false;
  TrainConfig train;
  ModelConfig model;
  EvalFlags eval;

  void Register(CLI::App* app) {
    app->add_option("--data", data, "Dataset manifest")->required();
    app->add_option("--out", out_path, "Checkpoint path (best validation F)")->required();
    app->add_option("--final-out", final_out, "Also write the last-epoch checkpoint here");
    app->add_option("--metrics", metrics, "Metrics CSV (default <out>.metrics.csv)");
    app->add_option("--epochs", train.epochs, "Passes over the training split");
    app->add_option("--seed", train.seed, "Seed for initialisation, sampling and dropout");
    app->add_option("--lr-g", train.lr_g, "Generator learning rate");
    app->add_option("--lr-d", train.lr_d, "Discriminator learning rate");
    app->add_option("--tau", train.tau, "Weight of the generated pair");
    app->add_option("--shot-len", train.shot_len, "Frames per training shot");
    app->add_option("--shot-overlap", train.shot_overlap, "Overlap between candidate shots");
    app->add_option("--g-steps", train.g_steps_per_iter, "Generator updates per iteration");
    app->add_option("--d-steps", train.d_steps_per_iter, "Discriminator updates per iteration");
    app->add_option("--mode", mode, "three-player | two-player | g-only");
    app->add_flag("--no-supervised", no_supervised, "Drop the supervised score loss");
    app->add_option("--clip-norm", train.clip_norm, "Global gradient-norm cap (0 = off)");
    app->add_option("--eval-every", train.eval_every, "Validate every N epochs (0 = last only)");
    app->add_option("--validation-split", validation, "train | test | all");
    app->add_option("--init", init, "random | zero");
    app->add_option("--holes", holes, "Four hole sizes per DTR layer");
    app->add_option("--hidden", model.hidden, "Generator Bi-LSTM hidden size");
    app->add_option("--encoded-dim", model.encoded_dim, "Encoded feature size");
    app->add_option("--disc-hidden", model.disc_hidden, "Discriminator Bi-LSTM hidden size");
    app->add_option("--head-widths", head_widths, "Discriminator head widths");
    app->add_option("--dropout", model.dropout, "Dropout rate before the score layer");
    eval.Register(app);
  }

  int Run(std::ostream& out) {
    train.adversarial = ParseAdversarialMode(mode);
    train.supervised_loss = !no_supervised;
    train.init = ParseInit(init);
    train.validation_split = ParseSplitKind(validation);
    train.eval = eval.Resolve();
    model.holes = ParseHoles(holes);
    model.head_widths = ParseSizeList(head_widths, "head widths");
    train.Validate();

    const Dataset dataset = LoadDataset(fs::path(data));
    model.feature_dim = dataset.feature_dim();
    model.Validate();
    if (metrics.empty()) metrics = WithSuffix(out_path, ".metrics.csv");

    json config = {
        {"command", "train"},
        {"data", data},
        {"out", out_path},
        {"final_out", final_out},
        {"metrics", metrics},
        {"epochs", train.epochs},
        {"seed", train.seed},
        {"lr_g", train.lr_g},
        {"lr_d", train.lr_d},
        {"tau", train.tau},
        {"shot_len", train.shot_len},
        {"shot_overlap", train.shot_overlap},
        {"g_steps", train.g_steps_per_iter},
        {"d_steps", train.d_steps_per_iter},
        {"mode", ToString(train.adversarial)},
        {"supervised_loss", train.supervised_loss},
        {"clip_norm", train.clip_norm},
        {"eval_every", train.eval_every},
        {"validation_split", validation},
        {"init", init},
        {"holes", JoinHoles(model.holes)},
        {"feature_dim", model.feature_dim},
        {"hidden", model.hidden},
        {"encoded_dim", model.encoded_dim},
        {"disc_hidden", model.disc_hidden},
        {"head_widths", model.head_widths},
        {"dropout", model.dropout},
        {"eval", eval.ToJson()},
    };
    const fs::path persist = WithSuffix(out_path, ".config.json");
    EchoConfig(config, out, &persist);

    const bool quiet = Quiet();
    TrainResult result = Train(dataset, model, train, [&](const EpochSummary& s) {
      if (quiet) return;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "epoch %zu/%zu L_D=%.6f L_G=%.6f (adv %.6f, summ %.6f)",
                    s.epoch + 1, train.epochs, s.d_loss, s.g_adv + s.g_summ, s.g_adv,
                    s.g_summ);
      out << buf;
      if (s.val_f) {
        std::snprintf(buf, sizeof(buf), " val_F=%.3f", *s.val_f);
        out << buf;
      }
      out << "\n";
    });

    SaveCheckpoint(out_path, result.best_model);
    if (!final_out.empty()) SaveCheckpoint(final_out, result.final_model);
    WriteTextFile(metrics, MetricsCsv(result.history));
    out << "best val_F=" << result.best_val_f << "; checkpoint " << out_path << "\n";
    return kExitOk;
  }
};

struct InferCommand {
  std::string ckpt;
  std::string features;
  std::string out_path;
  std::string split = "all";
  std::string video_id;

  void Register(CLI::App* app) {
    app->add_option("--ckpt", ckpt, "Checkpoint")->required();
    app->add_option("--features", features, "Feature file (.dtrf) or dataset manifest (.json)")
        ->required();
    app->add_option("--out", out_path, "Scores CSV")->required();
    app->add_option("--split", split, "Manifest split to score: train | test | all");
    app->add_option("--video-id", video_id, "Id for a single feature file (default: file stem)");
  }

  int Run(std::ostream& out) {
    const SplitKind kind = ParseSplitKind(split);
    const bool manifest = fs::path(features).extension() == ".json";
    if (video_id.empty() && !manifest) video_id = fs::path(features).stem().string();
    json config = {{"command", "infer"},
                   {"ckpt", ckpt},
                   {"features", features},
                   {"out", out_path},
                   {"split", split},
                   {"video_id", manifest ? "" : video_id}};
    const fs::path persist = WithSuffix(out_path, ".config.json");
    EchoConfig(config, out, &persist);

    const ModelBundle model = LoadCheckpoint(ckpt);
    std::vector<std::pair<std::string, Tensor>> inputs;
    if (manifest) {
      const Dataset dataset = LoadDataset(fs::path(features));
      for (const Video* v : dataset.Split(kind)) inputs.push_back({v->id, v->features});
    } else {
      inputs.push_back({video_id, LoadFeatures(features)});
    }
    ScoreTable table;
    for (auto& [id, f] : inputs) {
      if (f.cols() != model.config.feature_dim) {
        throw ValidationError("checkpoint expects feature dim " +
                              std::to_string(model.config.feature_dim) + " but '" + id +
                              "' has " + std::to_string(f.cols()));
      }
      table.push_back({id, model.generator.Infer(f)});
    }
    WriteTextFile(out_path, ScoresCsv(table));
    out << "scored " << table.size() << " videos -> " << out_path << "\n";
    return kExitOk;
  }
};

struct EvalCommand {
  std::string scores;
  std::string data;
  std::string out_path;
  std::string split = "test";
  EvalFlags eval;

  void Register(CLI::App* app) {
    app->add_option("--scores", scores, "Scores CSV from infer")->required();
    app->add_option("--data", data, "Dataset manifest")->required();
    app->add_option("--out", out_path, "Per-video evaluation CSV");
    app->add_option("--split", split, "train | test | all");
    eval.Register(app);
  }

  int Run(std::ostream& out) {
    const SplitKind kind = ParseSplitKind(split);
    const EvalConfig cfg = eval.Resolve();
    json config = {{"command", "eval"}, {"scores", scores}, {"data", data},
                   {"out", out_path},   {"split", split},   {"eval", eval.ToJson()}};
    const fs::path persist = WithSuffix(out_path, ".config.json");
    EchoConfig(config, out, out_path.empty() ? nullptr : &persist);

    const ScoreTable table = ParseScoresCsv(ReadTextFile(scores), scores);
    std::map<std::string, const std::vector<double>*> by_id;
    for (const auto& [id, s] : table) by_id[id] = &s;
    const Dataset dataset = LoadDataset(fs::path(data));

    std::string csv = "video_id,frames,segments,generated,reference,overlap,precision,recall,"
                      "f_measure\n";
    char buf[256];
    double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
    const auto videos = dataset.Split(kind);
    if (videos.empty()) throw ValidationError("split '" + split + "' has no videos");
    for (const Video* v : videos) {
      const auto it = by_id.find(v->id);
      if (it == by_id.end()) {
        throw ValidationError(scores + ": no scores for video '" + v->id + "'");
      }
      if (it->second->size() != v->frames()) {
        throw ValidationError(scores + ": video '" + v->id + "' has " +
                              std::to_string(it->second->size()) + " scores for " +
                              std::to_string(v->frames()) + " frames");
      }
      const EvalResult r =
          EvaluateVideo(*it->second, v->annotation.KeyframeMask(), v->features, cfg);
      std::snprintf(buf, sizeof(buf), ",%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,%.17g\n", v->frames(),
                    r.segmentation.num_segments(), r.overlap.generated, r.overlap.reference,
                    r.overlap.overlap, r.precision, r.recall, r.f_measure);
      csv += v->id + buf;
      sum_p += r.precision;
      sum_r += r.recall;
      sum_f += r.f_measure;
      if (!Quiet()) {
        std::snprintf(buf, sizeof(buf), "%s P=%.4f R=%.4f F=%.3f\n", v->id.c_str(),
                      r.precision, r.recall, r.f_measure);
        out << buf;
      }
    }
    const double n = static_cast<double>(videos.size());
    std::snprintf(buf, sizeof(buf), "mean,,,,,,%.17g,%.17g,%.17g\n", sum_p / n, sum_r / n,
                  sum_f / n);
    csv += buf;
    if (!out_path.empty()) WriteTextFile(out_path, csv);
    std::snprintf(buf, sizeof(buf), "mean F=%.4f over %zu videos\n", sum_f / n, videos.size());
    out << buf;
    return kExitOk;
  }
};

struct GradcheckCommand {
  std::string dims = "D=4,H=4,De=4,T=6,Hd=4";
  std::string holes = "1,4,16,64";
  double tol = 1e-4;
  double step = 1e-5;
  std::size_t max_entries = 512;
  std::uint64_t seed = 3;

  void Register(CLI::App* app) {
    app->add_option("--dims", dims, "Toy dimensions");
    app->add_option("--holes", holes, "Four hole sizes per DTR layer");
    app->add_option("--tol", tol, "Relative error tolerance");
    app->add_option("--step", step, "Central-difference step");
    app->add_option("--max-entries", max_entries,
                    "Entries probed per parameter, evenly spaced (0 = all)");
    app->add_option("--seed", seed, "Initialisation seed");
  }

  int Run(std::ostream& out) {
    const ToyDims toy = ParseToyDims(dims);
    const HoleSet hole_set = ParseHoles(holes);
    json config = {{"command", "gradcheck"}, {"dims", dims}, {"holes", JoinHoles(hole_set)},
                   {"tol", tol},             {"step", step}, {"max_entries", max_entries},
                   {"seed", seed}};
    EchoConfig(config, out, nullptr);
    GradCheckOptions options;
    options.tolerance = tol;
    options.step = step;
    options.max_entries_per_param = max_entries;
    const ModelGradCheck result = CheckModelGradients(toy, hole_set, options, seed);
    char buf[512];
    for (const LossCheck& loss : result.losses) {
      std::snprintf(buf, sizeof(buf), "loss %s: max rel error %.3e %s\n", loss.loss.c_str(),
                    loss.report.max_rel_error, loss.report.passed ? "PASS" : "FAIL");
      out << buf;
      for (const ParamCheck& p : loss.report.params) {
        std::snprintf(buf, sizeof(buf), "  %-60s %6zu/%-6zu %.3e %s\n", p.name.c_str(),
                      p.entries_checked, p.total_entries, p.max_rel_error,
                      p.passed ? "ok" : "FAIL");
        out << buf;
      }
    }
    out << (result.passed ? "gradcheck PASS\n" : "gradcheck FAIL\n");
    return result.passed ? kExitOk : kExitNumerical;
  }
};

struct VisualizeCommand {
  std::string scores;
  std::string gt;
  std::string features;
  std::string video_id;
  std::string out_path;
  EvalFlags eval;

  void Register(CLI::App* app) {
    app->add_option("--scores", scores, "Scores CSV from infer")->required();
    app->add_option("--gt", gt, "Ground-truth annotation JSON")->required();
    app->add_option("--features", features, "Feature file used for segmentation")->required();
    app->add_option("--video-id", video_id, "Video to plot (default: the annotation's id)");
    app->add_option("--out", out_path, "Output path; both .csv and .svg are written")
        ->required();
    eval.Register(app);
  }

  int Run(std::ostream& out) {
    const EvalConfig cfg = eval.Resolve();
    const fs::path base = fs::path(out_path).replace_extension();
    const fs::path csv_path = WithSuffix(base, ".csv");
    const fs::path svg_path = WithSuffix(base, ".svg");
    const AnnotationRecord annotation = LoadAnnotation(gt);
    if (video_id.empty()) video_id = annotation.video_id;
    json config = {{"command", "visualize"}, {"scores", scores},     {"gt", gt},
                   {"features", features},   {"video_id", video_id}, {"out", out_path},
                   {"eval", eval.ToJson()}};
    const fs::path persist = WithSuffix(base, ".config.json");
    EchoConfig(config, out, &persist);

    const ScoreTable table = ParseScoresCsv(ReadTextFile(scores), scores);
    const std::vector<double>* s = nullptr;
    for (const auto& [id, values] : table) {
      if (id == video_id) s = &values;
    }
    if (s == nullptr) throw ValidationError(scores + ": no scores for video '" + video_id + "'");
    const Tensor f = LoadFeatures(features);
    if (f.rows() != s->size() || annotation.num_frames != s->size()) {
      throw ValidationError("visualize: " + std::to_string(s->size()) + " scores, " +
                            std::to_string(annotation.num_frames) + " annotated frames, " +
                            std::to_string(f.rows()) + " feature rows");
    }
    const FrameMask keyframes = annotation.KeyframeMask();
    const EvalResult r = EvaluateVideo(*s, keyframes, f, cfg);
    const auto rows = BuildCurve(*s, keyframes, r.generated.mask);
    char title[256];
    std::snprintf(title, sizeof(title), "%s  F=%.2f", video_id.c_str(), r.f_measure);
    WriteTextFile(csv_path, CurveCsv(rows));
    WriteTextFile(svg_path, CurveSvg(title, rows));
    out << "wrote " << csv_path.string() << " and " << svg_path.string() << "\n";
    return kExitOk;
  }
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video summarization with dilated temporal relational GANs"};
  app.name("dtrsum");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  // One TOML file may hold a [section] per subcommand; flags take precedence.
  app.set_config("--config", "", "Config file (TOML) with a [subcommand] section");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  SynthCommand synth;
  TrainCommand train;
  InferCommand infer;
  EvalCommand eval;
  GradcheckCommand gradcheck;
  VisualizeCommand visualize;
  struct Entry {
    CLI::App* app;
    std::function<int(std::ostream&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& command) {
    CLI::App* sub = app.add_subcommand(name, help);
    command.Register(sub);
    entries.push_back({sub, [&command](std::ostream& o) { return command.Run(o); }});
  };
  add("synth", "Write a synthetic dataset", synth);
  add("train", "Train generator and discriminator", train);
  add("infer", "Score every frame of one or more videos", infer);
  add("eval", "Keyshot F-measure of frame scores", eval);
  add("gradcheck", "Finite-difference check of all gradients", gradcheck);
  add("visualize", "Score curve overlay as CSV and SVG", visualize);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    for (const Entry& entry : entries) {
      if (entry.app->parsed()) return entry.run(out);
    }
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace dtrsum::tools
