// Copyright 2026 The voddispatch Authors
// SPDX-License-Identifier: Apache-2.0

// voddispatch: generate a synthetic VOD world, train the clustering and
// policy networks, dispatch videos to CDNs and report workload statistics.
//
//   voddispatch --out run gen
//   voddispatch --out run train
//   voddispatch --out run dispatch
//   voddispatch --out run --policy threshold --h 1 --p 2 dispatch
//   voddispatch --out run report

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vod/analysis.hpp"
#include "vod/checkpoint.hpp"
#include "vod/config.hpp"
#include "vod/errors.hpp"
#include "vod/pipeline.hpp"
#include "vod/store.hpp"
#include "vod/trainer.hpp"
#include "vod/worldgen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct DispatchSettings {
  std::string policy = "learned";
  double h = 1.0;
  std::size_t p = 2;
};

struct Settings {
  vod::WorldConfig world;
  vod::TrainConfig train;
  DispatchSettings dispatch;
};

void bind_all(vod::ConfigBinder& b, Settings& s) {
  vod::bind_world_config(b, s.world);
  vod::bind_train_config(b, s.train);
  b.bind("policy", &s.dispatch.policy);
  b.bind("h", &s.dispatch.h);
  b.bind("p", &s.dispatch.p);
}

struct Options {
  std::string config;
  std::string out = ".";
  std::string world_dir;
  std::string models_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> policy;
  std::optional<double> h;
  std::optional<std::size_t> p;
  std::vector<std::string> defines;
  bool no_shuffle = false;
  bool resume = false;
};

Settings resolve(const Options& o) {
  Settings s;
  vod::ConfigBinder binder;
  bind_all(binder, s);
  if (!o.config.empty()) binder.apply(vod::load_key_values(o.config));
  vod::KeyValues overrides;
  for (const auto& d : o.defines) {
    const auto eq = d.find('=');
    if (eq == std::string::npos) throw vod::ConfigError("-D expects key=value, got '" + d + "'");
    overrides[d.substr(0, eq)] = d.substr(eq + 1);
  }
  binder.apply(overrides);
  if (o.seed) {
    s.world.seed = *o.seed;
    s.train.seed = *o.seed;
  }
  if (o.mode) s.train.mode = *o.mode;
  if (o.policy) s.dispatch.policy = *o.policy;
  if (o.h) s.dispatch.h = *o.h;
  if (o.p) s.dispatch.p = *o.p;
  if (o.no_shuffle) s.train.shuffle = false;
  s.train.temporal.intervals = s.world.intervals;
  if (s.dispatch.policy != "learned" && s.dispatch.policy != "threshold") {
    throw vod::ConfigError("policy must be learned or threshold");
  }
  return s;
}

fs::path out_dir(const Options& o) {
  const fs::path p(o.out);
  if (!fs::is_directory(p)) throw vod::MissingArtifact("output directory does not exist: " + p.string());
  return p;
}

void echo_config(const fs::path& path, Settings s) {
  vod::ConfigBinder b;
  bind_all(b, s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vod::MissingArtifact("cannot write " + path.string());
  vod::write_key_values(out, b.entries());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vod::MissingArtifact("cannot write " + path.string());
  return out;
}

// Training keys recorded next to the checkpoints so later commands rebuild the same networks.
vod::TrainConfig load_train_config(const fs::path& models) {
  const fs::path p = models / "train.cfg";
  if (!fs::exists(p)) throw vod::MissingArtifact("missing " + p.string() + "; run train first");
  vod::TrainConfig cfg;
  vod::ConfigBinder b;
  vod::bind_train_config(b, cfg);
  b.apply(vod::load_key_values(p));
  return cfg;
}

vod::TrainState load_models(const fs::path& dir) {
  vod::TrainState s;
  for (const char* name : {"temporal.ckpt", "policy.ckpt", "clustering.ckpt"}) {
    if (!fs::exists(dir / name)) throw vod::MissingArtifact("missing checkpoint " + (dir / name).string());
  }
  s.temporal = vod::load_checkpoint(dir / "temporal.ckpt");
  s.policy = vod::load_checkpoint(dir / "policy.ckpt");
  s.clustering = vod::load_checkpoint(dir / "clustering.ckpt");
  return s;
}

json report_json(const vod::EvalReport& r) {
  return {{"r_whole", r.r_whole},         {"r_peak", r.r_peak},         {"accuracy", r.accuracy},
          {"dispatched", r.dispatched},   {"whole_hits", r.whole_hits}, {"peak_hits", r.peak_hits},
          {"cp_load", r.cp_load},         {"capacity_exceeded", r.capacity_exceeded}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_gen(const Options& o) {
  const Settings s = resolve(o);
  const fs::path out = out_dir(o);
  const vod::World world = vod::generate_world(s.world);
  vod::write_world(world, out);
  echo_config(out / "resolved.cfg", s);
  std::cout << "generated " << world.video_count() << " videos over " << world.config.days << " days into "
            << out.string() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  Settings s = resolve(o);
  const fs::path out = out_dir(o);
  const fs::path world_dir = o.world_dir.empty() ? out : fs::path(o.world_dir);
  const vod::World world = vod::read_world(world_dir);
  s.train.temporal.intervals = world.config.intervals;
  const vod::TrainConfig& cfg = s.train;

  const vod::RequestTensor totals = vod::world_corpus_totals(world, cfg);
  const vod::ReplayDataset ds = vod::world_dataset(world, cfg);
  const std::size_t users = world.config.users;
  vod::TrainState start;
  if (o.resume) {
    start = load_models(o.models_dir.empty() ? out : fs::path(o.models_dir));
  } else {
    start = vod::init_models(cfg, users, totals);
  }
  const vod::TrainResult result = vod::run_training(cfg, ds, users, totals, start);

  vod::save_checkpoint(out / "temporal.ckpt", result.models.temporal);
  vod::save_checkpoint(out / "policy.ckpt", result.models.policy);
  vod::save_checkpoint(out / "clustering.ckpt", result.models.clustering);
  {
    auto f = open_out(out / "policy_trace.csv");
    vod::write_policy_trace(f, result.policy_trace);
  }
  {
    auto f = open_out(out / "cluster_trace.csv");
    vod::write_cluster_trace(f, result.cluster_trace);
  }
  if (!result.events.empty()) {
    auto f = open_out(out / "store_events.csv");
    f << "kind,family,version,actor\n";
    for (const auto& e : result.events) {
      f << (e.kind == vod::StoreEvent::Kind::kRead ? "read" : "publish") << ',' << vod::family_name(e.family) << ','
        << e.version << ',' << e.actor << '\n';
    }
  }
  {
    vod::TrainConfig copy = cfg;
    vod::ConfigBinder b;
    vod::bind_train_config(b, copy);
    auto f = open_out(out / "train.cfg");
    vod::write_key_values(f, b.entries());
  }
  echo_config(out / "resolved.cfg", s);
  const double last_p = result.policy_trace.empty() ? 0.0 : result.policy_trace.back().loss;
  const double last_c = result.cluster_trace.empty() ? 0.0 : result.cluster_trace.back().loss;
  std::cout << "trained " << result.policy_trace.size() << " policy and " << result.cluster_trace.size()
            << " clustering iterations; final loss_p " << last_p << ", loss_c " << last_c << '\n';
  return 0;
}

int cmd_dispatch(const Options& o) {
  const Settings s = resolve(o);
  const fs::path out = out_dir(o);
  const vod::World world = vod::read_world(o.world_dir.empty() ? out : fs::path(o.world_dir));
  const std::size_t day = world.eval_day();

  json report;
  report["day"] = day;
  report["budget"] = world.config.dispatch_budget;
  const auto baseline = vod::threshold_dispatch(world, day, s.dispatch.h, s.dispatch.p);
  report["baseline"] = report_json(baseline.report);
  report["baseline"]["h"] = s.dispatch.h;
  report["baseline"]["p"] = s.dispatch.p;

  const vod::DispatchPlan* plan = &baseline.plan;
  std::optional<vod::DispatchOutcome> learned;
  if (s.dispatch.policy == "learned") {
    const fs::path models = o.models_dir.empty() ? out : fs::path(o.models_dir);
    vod::TrainConfig cfg = load_train_config(models);
    const vod::TrainState state = load_models(models);
    const vod::Prediction pred = vod::predict_day(world, cfg, state, day);
    learned = vod::learned_dispatch(world, pred);
    plan = &learned->plan;
    report["learned"] = report_json(learned->report);
    const double ratio = baseline.report.accuracy > 0.0 ? learned->report.accuracy / baseline.report.accuracy
                                                        : std::numeric_limits<double>::infinity();
    report["accuracy_ratio"] = number_or_null(ratio);
  }
  report["policy"] = s.dispatch.policy;
  {
    auto f = open_out(out / "plan.csv");
    vod::write_plan_csv(f, *plan);
  }
  {
    auto f = open_out(out / "eval.json");
    f << report.dump(2) << '\n';
  }
  echo_config(out / "resolved.cfg", s);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  const Settings s = resolve(o);
  const fs::path out = out_dir(o);
  const vod::World world = vod::read_world(o.world_dir.empty() ? out : fs::path(o.world_dir));

  json report;
  const auto st = vod::stationarity_report(world.requests, world.config.intervals);
  report["dom_raw"] = st.raw;
  report["dom_diff"] = st.differenced;
  report["stationarity_series"] = st.series;

  const auto rf = vod::rank_frequency(world.requests);
  double total = 0.0;
  for (const auto& r : rf) total += r.requests;
  const std::size_t top = std::max<std::size_t>(1, rf.size() / 100);
  double top_mass = 0.0;
  for (std::size_t i = 0; i < top; ++i) top_mass += rf[i].requests;
  report["total_requests"] = total;
  report["top_1pct_share"] = total > 0.0 ? top_mass / total : 0.0;
  {
    auto f = open_out(out / "rank_frequency.csv");
    f << "rank,video_id,requests\n";
    for (const auto& r : rf) f << r.rank << ',' << r.video << ',' << static_cast<long long>(r.requests) << '\n';
  }

  const fs::path models = o.models_dir.empty() ? out : fs::path(o.models_dir);
  vod::TrainConfig cfg = load_train_config(models);
  const vod::TrainState state = load_models(models);
  const vod::Prediction pred = vod::predict_day(world, cfg, state, world.eval_day());
  const auto q = vod::prediction_quality(world, cfg, state, pred);
  report["intra_mean"] = q.intra_mean;
  report["inter_mean"] = q.inter_mean;
  report["intra_cv"] = q.intra_cv;
  report["inter_cv"] = q.inter_cv;
  report["corr_nv_area"] = number_or_null(q.corr_nv_area);
  report["corr_nv_ad"] = number_or_null(q.corr_nv_ad);
  report["intra_gt_inter"] = q.intra_mean > q.inter_mean;
  json clusters = json::array();
  for (const auto& c : q.clusters) {
    clusters.push_back({{"cluster", c.cluster},
                        {"members", c.members},
                        {"area", c.area},
                        {"average_distance", c.average_distance},
                        {"ns_mean", c.ns.mean},
                        {"ns_cv", c.ns.cv},
                        {"l1_mean", c.l1.mean},
                        {"l1_cv", c.l1.cv},
                        {"l2_mean", c.l2.mean},
                        {"l2_cv", c.l2.cv}});
  }
  report["clusters"] = clusters;
  {
    auto f = open_out(out / "report.json");
    f << report.dump(2) << '\n';
  }
  echo_config(out / "resolved.cfg", s);
  std::cout << "dom_raw " << st.raw << ", dom_diff " << st.differenced << ", intra_mean " << q.intra_mean
            << ", inter_mean " << q.inter_mean << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned VOD dispatch: synthetic worlds, training, dispatch and analysis"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  Options o;
  app.add_option("--config", o.config, "Flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory (must exist)");
  app.add_option("--world", o.world_dir, "World directory (defaults to --out)");
  app.add_option("--models", o.models_dir, "Checkpoint directory (defaults to --out)");
  app.add_option("--seed", o.seed, "Seed for world generation and training");
  app.add_option("--mode", o.mode, "Training schedule")->check(CLI::IsMember({"async", "interleaved"}));
  app.add_option("-D,--define", o.defines, "Override a config key: -D key=value");
  app.add_option("--policy", o.policy, "Dispatch policy")->check(CLI::IsMember({"learned", "threshold"}));
  app.add_option("--h", o.h, "Threshold dispatch: request threshold per interval");
  app.add_option("--p", o.p, "Threshold dispatch: consecutive intervals above the threshold");
  app.add_flag("--no-shuffle", o.no_shuffle, "Train chronologically: first half of the days, then the second");
  app.add_flag("--resume", o.resume, "Continue training from the checkpoints in --models");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic world");
  auto* train = app.add_subcommand("train", "Train the temporal, clustering and policy models");
  auto* dispatch = app.add_subcommand("dispatch", "Build and evaluate a dispatch plan for the held-out day");
  auto* report = app.add_subcommand("report", "Stationarity, long-tail and cluster-quality analysis");
  for (auto* sub : {gen, train, dispatch, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*train) return cmd_train(o);
    if (*dispatch) return cmd_dispatch(o);
    if (*report) return cmd_report(o);
  } catch (const vod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const vod::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const vod::MissingArtifact& e) {
    std::cerr << "missing artifact: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
