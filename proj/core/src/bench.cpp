// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/bench.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <json.hpp>

#include "apsm/errors.hpp"

namespace apsm::bench {
namespace {

struct Problem {
  FilterState filter;
  std::vector<ComplexVector> inputs;
};

// Unit-energy receive vectors and a dictionary drawn from the same
// distribution, so kernel values span the whole (0, 1] range.
Problem make_problem(std::size_t dict_size, std::size_t batch_size, std::size_t antennas,
                     const KernelParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double sd = std::sqrt(0.5 / static_cast<double>(antennas));
  std::normal_distribution<double> entry(0.0, sd);
  std::normal_distribution<double> coeff(0.0, 1.0);

  auto draw = [&] {
    ComplexVector r(antennas);
    for (auto& x : r) {
      const double re = entry(rng);
      const double im = entry(rng);
      x = {re, im};
    }
    return r;
  };

  Problem pb;
  pb.filter = FilterState(2 * antennas);
  pb.filter.reserve_atoms(dict_size);
  for (std::size_t i = 0; i < dict_size; ++i) {
    const auto [r1, r2] = realify(draw());
    pb.filter.add_section(i % 2 == 0 ? r1 : r2, 0.1 * coeff(rng), params);
  }
  pb.inputs.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) pb.inputs.push_back(draw());
  return pb;
}

}  // namespace

void BenchOptions::validate() const {
  if (repeats < 5) throw ParameterError("bench repeats must be at least 5");
  if (dict_sizes.empty() || batch_sizes.empty() || stages.empty() || workers.empty()) {
    throw ParameterError("bench sweep axes must be nonempty");
  }
  for (std::size_t w : workers) {
    if (w < 1) throw ParameterError("bench worker counts must be at least 1");
  }
  if (antennas < 1) throw ParameterError("bench antenna count must be at least 1");
  params.validate();
  engine.validate();
}

std::uint64_t checksum(std::span<const std::complex<double>> outputs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& z : outputs) {
    mix(z.real());
    mix(z.imag());
  }
  return h;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
  return xs[std::clamp<std::size_t>(rank, 1, xs.size()) - 1];
}

BenchReport bench_detection(const BenchOptions& opts) {
  opts.validate();
  BenchReport report;
  std::uint64_t cell_seed = opts.seed;

  for (std::size_t dict : opts.dict_sizes) {
    for (std::size_t batch : opts.batch_sizes) {
      const Problem pb = make_problem(dict, batch, opts.antennas, opts.params, cell_seed++);
      for (std::size_t workers : opts.workers) {
        EngineConfig cfg = opts.engine;
        cfg.workers = workers;
        cfg.stage = Stage::baseline;
        const std::uint64_t reference =
            checksum(batch_detect(pb.filter, pb.inputs, opts.params, cfg));

        for (Stage stage : opts.stages) {
          cfg.stage = stage;
          auto run = [&] { return batch_detect(pb.filter, pb.inputs, opts.params, cfg); };

          auto out = run();  // warm-up, also the checked output
          if (opts.fault_stage && *opts.fault_stage == stage && !out.empty()) {
            out.front() += std::complex<double>(1e-3, 0.0);
          }
          const std::uint64_t sum = checksum(out);
          if (sum != reference) {
            char msg[256];
            std::snprintf(msg, sizeof msg,
                          "stage %s output checksum %016llx differs from baseline %016llx "
                          "(dict %zu, batch %zu, workers %zu); timing suppressed",
                          std::string(to_string(stage)).c_str(),
                          static_cast<unsigned long long>(sum),
                          static_cast<unsigned long long>(reference), dict, batch, workers);
            throw ChecksumMismatch(msg);
          }

          std::vector<double> times_us;
          times_us.reserve(opts.repeats);
          for (std::size_t r = 0; r < opts.repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto y = run();
            const auto t1 = std::chrono::steady_clock::now();
            if (y.size() != batch) throw std::logic_error("engine returned a short batch");
            times_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
          }

          BenchRow row;
          row.stage = stage;
          row.dict_size = dict;
          row.batch_size = batch;
          row.workers = workers;
          row.median_us = median(times_us);
          row.p95_us = percentile(times_us, 0.95);
          row.throughput_evals_per_s =
              row.median_us > 0.0 ? 2.0 * static_cast<double>(batch) / (row.median_us * 1e-6)
                                  : 0.0;
          row.checksum = sum;
          report.rows.push_back(row);
        }
      }
    }
  }
  return report;
}

void write_csv(std::ostream& out, const BenchReport& report) {
  out << kCsvHeader << '\n';
  char line[512];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%.3f,%.3f,%.6e,%016llx\n",
                  std::string(to_string(r.stage)).c_str(), r.dict_size, r.batch_size, r.workers,
                  r.median_us, r.p95_us, r.throughput_evals_per_s,
                  static_cast<unsigned long long>(r.checksum));
    out << line;
  }
}

void write_json(std::ostream& out, const BenchReport& report) {
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  char hex[17];
  for (const auto& r : report.rows) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.checksum));
    nlohmann::ordered_json row;
    row["stage"] = std::string(to_string(r.stage));
    row["dict_size"] = r.dict_size;
    row["batch_size"] = r.batch_size;
    row["workers"] = r.workers;
    row["median_us"] = r.median_us;
    row["p95_us"] = r.p95_us;
    row["throughput_evals_per_s"] = r.throughput_evals_per_s;
    row["checksum"] = std::string(hex);
    doc["rows"].push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace apsm::bench
