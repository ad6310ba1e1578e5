// imd: command-line front end for the event-based independent-motion pipeline.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "imd/classifier.hpp"
#include "imd/corner_detector.hpp"
#include "imd/ego_model.hpp"
#include "imd/errors.hpp"
#include "imd/evaluation.hpp"
#include "imd/event_io.hpp"
#include "imd/flow_tracker.hpp"
#include "imd/json_io.hpp"
#include "imd/pipeline.hpp"
#include "imd/scene_simulator.hpp"

namespace fs = std::filesystem;
using namespace imd;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;

  PipelineConfig load() const;
};

// Failures while reading user configuration are reported as the config stage.
template <typename Fn>
auto configured(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
}

PipelineConfig Common::load() const {
  return configured([&] { return config.empty() ? PipelineConfig{} : load_pipeline_config(config); });
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "pipeline configuration JSON (overrides defaults)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failure on " + path.string());
}

// Runs fn and turns any library error into a "<stage>: cause" message.
template <typename Fn>
int run_stage(const std::string& stage, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage << ": " << e.what() << '\n';
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Independent motion detection on event streams"};
  app.require_subcommand(1);

  // simulate ----------------------------------------------------------------
  Common sim_common;
  std::string sim_scenario, sim_events, sim_encoders;
  std::optional<double> sim_duration;
  auto* sim = app.add_subcommand("simulate", "render a scenario to events and encoder samples");
  sim->add_option("--config", sim_common.config, "scenario JSON")->check(CLI::ExistingFile);
  sim->add_option("--preset", sim_scenario, "preset[:variant] instead of --config");
  sim->add_option("--seed", sim_common.seed, "noise seed");
  sim->add_option("--duration", sim_duration, "override duration, s");
  sim->add_option("--out-events", sim_events, "EVT0 output")->required();
  sim->add_option("--out-encoders", sim_encoders, "encoder CSV output")->required();

  // detect-corners ----------------------------------------------------------
  Common det_common;
  std::string det_in, det_out;
  auto* det = app.add_subcommand("detect-corners", "filter an event stream down to corner events");
  add_common(det, det_common);
  det->add_option("--events", det_in, "EVT0 input")->required()->check(CLI::ExistingFile);
  det->add_option("--out", det_out, "EVT0 corner output")->required();

  // track -------------------------------------------------------------------
  Common trk_common;
  std::string trk_in, trk_out;
  auto* trk = app.add_subcommand("track", "cluster corner events and estimate their flow");
  add_common(trk, trk_common);
  trk->add_option("--corners", trk_in, "EVT0 corner input")->required()->check(CLI::ExistingFile);
  trk->add_option("--out", trk_out, "FLW0 output")->required();

  // learn -------------------------------------------------------------------
  Common lrn_common;
  std::string lrn_in, lrn_enc, lrn_out;
  auto* lrn = app.add_subcommand("learn", "fit the ego-motion model on a static-scene stream");
  add_common(lrn, lrn_common);
  lrn->add_option("--events", lrn_in, "EVT0 corners (replayed through the tracker) or FLW0 flow")
      ->required()
      ->check(CLI::ExistingFile);
  lrn->add_option("--encoders", lrn_enc, "encoder CSV")->required()->check(CLI::ExistingFile);
  lrn->add_option("--out", lrn_out, "model JSON output")->required();

  // classify ----------------------------------------------------------------
  Common cls_common;
  std::string cls_flows, cls_enc, cls_model, cls_out;
  std::optional<double> cls_threshold;
  auto* cls = app.add_subcommand("classify", "label flow events against the model");
  add_common(cls, cls_common);
  cls->add_option("--flows", cls_flows, "FLW0 input")->required()->check(CLI::ExistingFile);
  cls->add_option("--encoders", cls_enc, "encoder CSV")->required()->check(CLI::ExistingFile);
  cls->add_option("--model", cls_model, "model JSON")->required()->check(CLI::ExistingFile);
  cls->add_option("--threshold", cls_threshold, "override T");
  cls->add_option("--out", cls_out, "detection CSV output")->required();

  // evaluate ----------------------------------------------------------------
  Common ev_common;
  std::string ev_in, ev_pr, ev_trace, ev_traj, ev_svg;
  std::optional<double> ev_bin;
  auto* ev = app.add_subcommand("evaluate", "precision/recall sweep and distance trace");
  add_common(ev, ev_common);
  ev->add_option("--detections", ev_in, "detection CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--out-pr", ev_pr, "PR CSV output");
  ev->add_option("--out-trace", ev_trace, "distance trace CSV output");
  ev->add_option("--bin", ev_bin, "trace bin width, s");
  ev->add_option("--trajectories", ev_traj, "directory for per-cluster trajectory CSVs");
  ev->add_option("--svg-dir", ev_svg, "directory for PR and trace SVG charts");

  // pipeline ----------------------------------------------------------------
  Common pl_common;
  std::string pl_train, pl_test, pl_train_events, pl_train_enc, pl_test_events, pl_test_enc, pl_model, pl_out;
  bool pl_svg = false;
  auto* pl = app.add_subcommand("pipeline", "simulate, detect, track, learn, classify and evaluate");
  add_common(pl, pl_common);
  pl->add_option("--train", pl_train, "training scenario: preset[:variant] or scenario JSON");
  pl->add_option("--train-events", pl_train_events, "training EVT0 instead of a scenario");
  pl->add_option("--train-encoders", pl_train_enc, "training encoder CSV");
  pl->add_option("--test", pl_test, "test scenario: preset[:variant] or scenario JSON");
  pl->add_option("--test-events", pl_test_events, "test EVT0 instead of a scenario");
  pl->add_option("--test-encoders", pl_test_enc, "test encoder CSV");
  pl->add_option("--model", pl_model, "use this model instead of learning")->check(CLI::ExistingFile);
  pl->add_option("--out", pl_out, "artifact directory")->required();
  pl->add_flag("--svg", pl_svg, "also write PR and trace SVG charts");

  // presets / config --------------------------------------------------------
  auto* presets = app.add_subcommand("presets", "list scenario presets");
  std::string show_preset;
  presets->add_option("--dump", show_preset, "print one preset[:variant] as scenario JSON");
  Common cfg_common;
  auto* cfg = app.add_subcommand("config", "print the effective pipeline configuration");
  add_common(cfg, cfg_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: args: " << e.what() << "\nRun with --help for more information.\n";
    return e.get_exit_code();
  }

  if (*sim) {
    return run_stage("simulate", [&] {
      auto scenario = configured([&] {
        if (sim_scenario.empty() == sim_common.config.empty()) {
          throw ConfigError("give exactly one of --config or --preset");
        }
        return resolve_scenario(sim_common.config.empty() ? sim_scenario : sim_common.config);
      });
      if (sim_duration) scenario.duration_s = *sim_duration;
      const auto result = simulate(scenario.scene, scenario.trajectory, scenario.duration_s, sim_common.seed);
      write_event_file(sim_events, result.header, result.events);
      write_encoder_csv(sim_encoders, result.encoders);
    });
  }
  if (*det) {
    return run_stage("detect-corners", [&] {
      const auto cfg = det_common.load();
      const auto file = read_event_file(det_in);
      const auto corners = detect_stream(file.events, file.header.sensor, cfg.detector);
      write_event_file(det_out, file.header, to_labeled_events(corners));
    });
  }
  if (*trk) {
    return run_stage("track", [&] {
      const auto cfg = trk_common.load();
      const auto file = read_event_file(trk_in);
      const auto corners = from_labeled_events(file.events);
      write_flow_file(trk_out, track_stream(corners, cfg.tracker));
    });
  }
  if (*lrn) {
    return run_stage("learn", [&] {
      const auto cfg = lrn_common.load();
      const auto velocities = estimate_velocities(read_encoder_csv(lrn_enc), cfg.encoder.alpha);
      std::vector<TrainingExample> examples;
      if (read_magic(lrn_in) == std::string(kFlowMagic.begin(), kFlowMagic.end())) {
        const auto flows = read_flow_file(lrn_in);
        FlowReplay replay(flows, cfg.tracker);
        examples = collect_examples(replay, velocities, cfg.learner);
      } else {
        const auto corners = from_labeled_events(read_event_file(lrn_in).events);
        TrackerReplay replay(corners, cfg.tracker);
        examples = collect_examples(replay, velocities, cfg.learner);
      }
      save_model(lrn_out, train(examples, cfg.learner));
    });
  }
  if (*cls) {
    return run_stage("classify", [&] {
      auto cfg = cls_common.load();
      if (cls_threshold) cfg.classifier.threshold = *cls_threshold;
      cfg.classifier.validate();
      const auto velocities = estimate_velocities(read_encoder_csv(cls_enc), cfg.encoder.alpha);
      const auto flows = read_flow_file(cls_flows);
      const auto model = load_model(cls_model);
      write_detections_csv(cls_out, classify_stream(flows, model, velocities, cfg.classifier));
    });
  }
  if (*ev) {
    return run_stage("evaluate", [&] {
      const auto cfg = ev_common.load();
      const auto detections = read_detections_csv(ev_in);
      const auto thresholds = cfg.thresholds.empty() ? default_thresholds() : cfg.thresholds;
      const auto pr = pr_sweep(detections, thresholds);
      const auto trace = distance_trace(detections, ev_bin.value_or(cfg.trace_bin_s));
      if (!ev_pr.empty()) write_pr_csv(ev_pr, pr);
      if (!ev_trace.empty()) write_trace_csv(ev_trace, trace);
      if (!ev_traj.empty()) write_trajectories(ev_traj, export_trajectories(detections));
      if (!ev_svg.empty()) {
        fs::create_directories(ev_svg);
        write_text(fs::path(ev_svg) / "pr.svg", pr_curve_svg(pr));
        write_text(fs::path(ev_svg) / "trace.svg", distance_trace_svg(trace));
      }
      if (ev_pr.empty() && ev_trace.empty()) write_pr_csv("/dev/stdout", pr);
    });
  }
  if (*pl) {
    return run_stage("pipeline", [&] {
      const auto cfg = pl_common.load();
      PipelineInputs in;
      in.seed = pl_common.seed;
      in.out_dir = pl_out;
      if (!pl_train.empty()) in.train.scenario = configured([&] { return resolve_scenario(pl_train); });
      in.train.events = pl_train_events;
      in.train.encoders = pl_train_enc;
      if (!pl_test.empty()) in.test.scenario = configured([&] { return resolve_scenario(pl_test); });
      in.test.events = pl_test_events;
      in.test.encoders = pl_test_enc;
      if (!pl_model.empty()) in.model = fs::path(pl_model);
      const auto art = run_pipeline(cfg, in);
      if (pl_svg && !art.pr.empty()) {
        try {
          write_text(fs::path(pl_out) / "pr.svg", pr_curve_svg(art.pr));
          write_text(fs::path(pl_out) / "trace.svg", distance_trace_svg(art.trace));
        } catch (const std::exception& e) {
          throw StageError("write", e.what());
        }
      }
      for (const auto& p : art.written) std::cout << p.string() << '\n';
    });
  }
  if (*presets) {
    return run_stage("presets", [&] {
      if (!show_preset.empty()) {
        std::cout << scenario_to_json(resolve_scenario(show_preset));
        return;
      }
      for (const auto& p : scenario_presets()) {
        std::cout << p.name << ": " << p.description << '\n';
        for (const auto& v : p.variants) std::cout << "  " << p.name << ':' << v.name << '\n';
      }
    });
  }
  if (*cfg) {
    return run_stage("config", [&] { std::cout << pipeline_config_to_json(cfg_common.load()); });
  }
  return 0;
}
