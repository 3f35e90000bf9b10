// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "apsm/bench.hpp"
#include "apsm/errors.hpp"
#include "apsm/io.hpp"
#include "apsm/parallel.hpp"

namespace apsm::cli {
namespace {

constexpr std::size_t kDetectChunk = 4096;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string trial_stem(const TrialRow& row) {
  return std::string(sim::to_string(row.scheme)) + "_M" + std::to_string(row.antennas) +
         "_seed" + std::to_string(row.seed);
}

void dump_trial(const std::filesystem::path& dir, const TrialRow& row, const sim::Frame& frame,
                const RunConfig& cfg, const FilterState& filter) {
  const std::string stem = trial_stem(row);
  const auto m = static_cast<std::uint32_t>(row.antennas);
  const std::size_t nt = cfg.frame.n_train;
  const std::span<const ComplexVector> rx(frame.received);
  io::write_iq_file(dir / (stem + ".train.iq"), rx.first(nt), m);
  io::write_iq_file(dir / (stem + ".data.iq"), rx.subspan(nt), m);

  std::vector<ComplexVector> pilots;
  pilots.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) pilots.push_back({frame.symbols[cfg.target_user][t]});
  io::write_iq_file(dir / (stem + ".pilots.iq"), pilots, 1);
  io::write_model_file(dir / (stem + ".model"), filter, cfg.apsm.params);
}

struct Cell {
  std::size_t begin;
  std::size_t end;
};

std::vector<Cell> cells_of(const RunConfig& cfg, std::size_t rows) {
  std::vector<Cell> cells;
  const std::size_t per = cfg.seeds.size();
  for (std::size_t b = 0; b < rows; b += per) cells.push_back({b, b + per});
  return cells;
}

struct Aggregate {
  double mean_ber = 0.0;
  double sd_ber = 0.0;
  double mean_atoms = 0.0;
  double sd_atoms = 0.0;
  double mean_us = 0.0;
  double sd_us = 0.0;
};

Aggregate aggregate(const std::vector<TrialRow>& rows, Cell c) {
  const auto n = static_cast<double>(c.end - c.begin);
  auto stats = [&](auto get, double& mean, double& sd) {
    double s = 0.0;
    for (std::size_t i = c.begin; i < c.end; ++i) s += get(rows[i]);
    mean = s / n;
    double ss = 0.0;
    for (std::size_t i = c.begin; i < c.end; ++i) ss += (get(rows[i]) - mean) * (get(rows[i]) - mean);
    sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  };
  Aggregate a;
  stats([](const TrialRow& r) { return r.ber; }, a.mean_ber, a.sd_ber);
  stats([](const TrialRow& r) { return static_cast<double>(r.atoms); }, a.mean_atoms, a.sd_atoms);
  stats([](const TrialRow& r) { return r.detect_us; }, a.mean_us, a.sd_us);
  return a;
}

std::string csv_prefix(const RunConfig& cfg, const std::string& seed, const TrialRow& r) {
  const auto& p = cfg.apsm.params;
  return seed + "," + std::to_string(r.users) + "," + std::to_string(r.antennas) + "," +
         std::string(sim::to_string(r.scheme)) + "," + fmt("%.9g", cfg.apsm.epsilon) + "," +
         std::to_string(cfg.apsm.window) + "," + fmt("%.9g", p.sigma_sq) + "," +
         fmt("%.9g", p.w_linear) + "," + fmt("%.9g", p.w_gaussian) + "," +
         fmt("%.9g", r.noise_var);
}

nlohmann::ordered_json json_row(const RunConfig& cfg, const TrialRow& r) {
  nlohmann::ordered_json j;
  j["K"] = r.users;
  j["M"] = r.antennas;
  j["scheme"] = std::string(sim::to_string(r.scheme));
  j["epsilon"] = cfg.apsm.epsilon;
  j["W"] = cfg.apsm.window;
  j["sigma_sq"] = cfg.apsm.params.sigma_sq;
  j["w_L"] = cfg.apsm.params.w_linear;
  j["w_G"] = cfg.apsm.params.w_gaussian;
  j["noise_var"] = r.noise_var;
  return j;
}

enum class Format { csv, json };

struct OutputFlags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  bool json = false;
  bool csv = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;

  Format format() const { return json ? Format::json : Format::csv; }
};

RunConfig load_with_overrides(const OutputFlags& f) {
  RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
  if (f.seed) {
    cfg.seeds = {*f.seed};
    cfg.bench.seed = *f.seed;
  }
  if (f.workers) {
    cfg.engine.workers = *f.workers;
    cfg.bench.workers = {*f.workers};
  }
  cfg.validate();
  return cfg;
}

// Writes `emit(format)` to --out, to the configured [output] paths, or to
// stdout when neither is given.
template <typename Emit>
void emit_outputs(const OutputFlags& f, const RunConfig& cfg, std::ostream& stdout_, Emit emit) {
  bool wrote = false;
  if (f.out) {
    auto out = open_output(*f.out);
    emit(out, f.format());
    wrote = true;
  }
  if (cfg.csv_path) {
    auto out = open_output(*cfg.csv_path);
    emit(out, Format::csv);
    wrote = true;
  }
  if (cfg.json_path) {
    auto out = open_output(*cfg.json_path);
    emit(out, Format::json);
    wrote = true;
  }
  if (!wrote) emit(stdout_, f.format());
}

int cmd_simulate(const OutputFlags& f, std::ostream& out) {
  if (!f.config) throw InputError("simulate requires --config");
  const RunConfig cfg = load_with_overrides(f);
  const auto rows = simulate(cfg);
  emit_outputs(f, cfg, out, [&](std::ostream& o, Format fm) {
    fm == Format::csv ? write_simulate_csv(o, cfg, rows) : write_simulate_json(o, cfg, rows);
  });
  return kExitOk;
}

int cmd_bench(const OutputFlags& f, std::ostream& out) {
  const RunConfig cfg = load_with_overrides(f);
  bench::BenchOptions opts = cfg.bench;
  opts.params = cfg.apsm.params;
  opts.engine = cfg.engine;
  const auto report = bench::bench_detection(opts);
  emit_outputs(f, cfg, out, [&](std::ostream& o, Format fm) {
    fm == Format::csv ? bench::write_csv(o, report) : bench::write_json(o, report);
  });
  return kExitOk;
}

int cmd_train(const OutputFlags& f, const std::string& iq_path, const std::string& pilots_path) {
  if (!f.out) throw InputError("train requires --out");
  const RunConfig cfg = load_with_overrides(f);

  auto iq_in = open_input(iq_path);
  io::IqHeader iq_header;
  const auto received = io::read_iq(iq_in, &iq_header);
  auto pilots_in = open_input(pilots_path);
  io::IqHeader pilot_header;
  const auto pilots = io::read_iq(pilots_in, &pilot_header);
  if (pilot_header.antennas != 1) {
    throw InputError("pilot file must have one value per sample, found " +
                     std::to_string(pilot_header.antennas));
  }
  if (pilots.size() != received.size()) {
    throw InputError("pilot count " + std::to_string(pilots.size()) +
                     " does not match IQ sample count " + std::to_string(received.size()));
  }

  std::vector<TrainingSymbol> stream;
  stream.reserve(received.size());
  for (std::size_t t = 0; t < received.size(); ++t) stream.emplace_back(received[t], pilots[t][0]);
  const FilterState filter = train(FilterState(2 * iq_header.antennas), stream, cfg.apsm);
  io::write_model_file(*f.out, filter, cfg.apsm.params);
  return kExitOk;
}

int cmd_detect(const OutputFlags& f, const std::string& model_path, const std::string& iq_path) {
  if (!f.out) throw InputError("detect requires --out");
  const RunConfig cfg = load_with_overrides(f);

  auto model_in = open_input(model_path);
  const io::Model model = io::read_model(model_in);
  auto iq_in = open_input(iq_path);
  io::IqStreamReader reader(iq_in);
  if (model.filter.dim() != 2 * static_cast<std::size_t>(reader.header().antennas)) {
    throw InputError("model expects M = " + std::to_string(model.filter.dim() / 2) +
                     " antennas, IQ file has M = " + std::to_string(reader.header().antennas));
  }

  auto out = open_output(*f.out);
  while (reader.remaining() > 0) {
    const auto chunk = reader.next(kDetectChunk);
    const auto estimates = batch_detect(model.filter, chunk, model.params, cfg.engine);
    io::write_symbols_f32(out, estimates);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + *f.out);
  return kExitOk;
}

void add_common(CLI::App* sub, OutputFlags& f, bool formats) {
  sub->add_option("--config", f.config, "Run configuration file");
  sub->add_option("--out", f.out, "Output path");
  sub->add_option("--seed", f.seed, "Override the configured seed(s)");
  sub->add_option("--workers", f.workers, "Override the worker count")
      ->check(CLI::PositiveNumber);
  if (formats) {
    auto* json = sub->add_flag("--json", f.json, "Emit JSON");
    auto* csv = sub->add_flag("--csv", f.csv, "Emit CSV (default)");
    json->excludes(csv);
  }
}

}  // namespace

std::vector<TrialRow> simulate(const RunConfig& cfg) {
  cfg.validate();
  std::vector<TrialRow> rows;
  for (auto scheme : cfg.schemes) {
    for (std::size_t m : cfg.antennas) {
      for (std::uint64_t seed : cfg.seeds) {
        TrialRow r;
        r.seed = seed;
        r.users = cfg.users;
        r.antennas = m;
        r.scheme = scheme;
        r.noise_var = cfg.noise_variance();
        rows.push_back(r);
      }
    }
  }

  // Trials run concurrently when there are enough of them; the engine then
  // gets one worker per trial.
  const std::size_t workers = std::max<std::size_t>(1, cfg.engine.workers);
  const bool across_trials = rows.size() >= workers && workers > 1;
  EngineConfig engine = cfg.engine;
  if (across_trials) engine.workers = 1;
  if (cfg.frame_dir) std::filesystem::create_directories(*cfg.frame_dir);

  const auto powers = cfg.powers();
  parallel_for(rows.size(), across_trials ? workers : 1, [&](std::size_t i, std::size_t) {
    TrialRow& r = rows[i];
    sim::Rng rng(r.seed);
    const auto ch = sim::draw_channel(r.users, r.antennas, powers, r.noise_var, rng);
    sim::FrameSpec frame = cfg.frame;
    frame.scheme = r.scheme;
    const auto data = sim::generate_frame(ch, frame, rng);
    FilterState filter;
    const auto report =
        sim::run_trial_on_frame(data, frame, cfg.apsm, engine, cfg.target_user, &filter);
    r.ber = report.ber;
    r.atoms = report.trained_atoms;
    r.detect_us = std::chrono::duration<double, std::micro>(report.detect_time).count();
    if (cfg.frame_dir) dump_trial(*cfg.frame_dir, r, data, cfg, filter);
  });
  return rows;
}

void write_simulate_csv(std::ostream& out, const RunConfig& cfg,
                        const std::vector<TrialRow>& rows) {
  out << kSimulateCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_prefix(cfg, std::to_string(r.seed), r) << ',' << fmt("%.9e", r.ber) << ','
        << r.atoms << ',' << fmt("%.3f", r.detect_us) << '\n';
  }
  for (const auto c : cells_of(cfg, rows.size())) {
    const auto a = aggregate(rows, c);
    const TrialRow& r = rows[c.begin];
    out << csv_prefix(cfg, "mean", r) << ',' << fmt("%.9e", a.mean_ber) << ','
        << fmt("%.3f", a.mean_atoms) << ',' << fmt("%.3f", a.mean_us) << '\n';
    out << csv_prefix(cfg, "sd", r) << ',' << fmt("%.9e", a.sd_ber) << ','
        << fmt("%.3f", a.sd_atoms) << ',' << fmt("%.3f", a.sd_us) << '\n';
  }
}

void write_simulate_json(std::ostream& out, const RunConfig& cfg,
                         const std::vector<TrialRow>& rows) {
  nlohmann::ordered_json doc;
  doc["trials"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    auto j = json_row(cfg, r);
    j["seed"] = r.seed;
    j["ber"] = r.ber;
    j["atoms"] = r.atoms;
    j["detect_us"] = r.detect_us;
    doc["trials"].push_back(std::move(j));
  }
  doc["cells"] = nlohmann::ordered_json::array();
  for (const auto c : cells_of(cfg, rows.size())) {
    const auto a = aggregate(rows, c);
    auto j = json_row(cfg, rows[c.begin]);
    j["trials"] = c.end - c.begin;
    j["ber_mean"] = a.mean_ber;
    j["ber_sd"] = a.sd_ber;
    j["atoms_mean"] = a.mean_atoms;
    j["detect_us_mean"] = a.mean_us;
    doc["cells"].push_back(std::move(j));
  }
  out << doc.dump(2) << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiuser detection with adaptive projected subgradient kernel filters",
               "apsm-mud"};
  app.require_subcommand(1);

  OutputFlags sim_flags, bench_flags, train_flags, detect_flags;
  std::string iq_path, pilots_path, model_path;

  auto* sim_cmd = app.add_subcommand("simulate", "Run a BER trial sweep");
  add_common(sim_cmd, sim_flags, true);

  auto* bench_cmd = app.add_subcommand("bench", "Time the detection engine stages");
  add_common(bench_cmd, bench_flags, true);

  auto* train_cmd = app.add_subcommand("train", "Train a model from IQ samples and pilots");
  add_common(train_cmd, train_flags, false);
  train_cmd->add_option("--iq", iq_path, "Received IQ file")->required();
  train_cmd->add_option("--pilots", pilots_path, "Pilot symbols as a single-antenna IQ file")
      ->required();

  auto* detect_cmd = app.add_subcommand("detect", "Detect symbols in a recorded IQ file");
  add_common(detect_cmd, detect_flags, false);
  detect_cmd->add_option("--model", model_path, "Model file")->required();
  detect_cmd->add_option("--iq", iq_path, "IQ file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim_flags, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_flags, out);
    if (train_cmd->parsed()) return cmd_train(train_flags, iq_path, pilots_path);
    if (detect_cmd->parsed()) return cmd_detect(detect_flags, model_path, iq_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const bench::ChecksumMismatch& e) {
    err << "correctness failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace apsm::cli
