// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include "apsm/batch_engine.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <string>

#include "apsm/detail/fast_exp.hpp"
#include "apsm/errors.hpp"
#include "apsm/parallel.hpp"

namespace apsm {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::baseline: return "baseline";
    case Stage::grouped: return "grouped";
    case Stage::tiled: return "tiled";
    case Stage::balanced: return "balanced";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(Precision precision) {
  return precision == Precision::f64 ? "f64" : "f32";
}

std::optional<Precision> parse_precision(std::string_view name) {
  if (name == "f64") return Precision::f64;
  if (name == "f32") return Precision::f32;
  return std::nullopt;
}

void EngineConfig::validate() const {
  if (tile_atoms < 1 || tile_inputs < 1 || chunk_dim < 1 || workers < 1) {
    throw ParameterError("engine tile sizes and worker count must be at least 1");
  }
}

namespace {

template <typename T>
struct Problem {
  const T* inputs = nullptr;  // count x dim
  const T* atoms = nullptr;   // n_atoms x dim, row-major
  const T* packed = nullptr;  // balanced only: per slice, dim x packed_stride
  std::size_t packed_stride = 0;
  const double* coeffs = nullptr;
  std::size_t dim = 0;
  std::size_t n_atoms = 0;
  std::size_t tile_atoms = 0;
  std::size_t chunk_dim = 0;
  double neg_inv_two_sigma_sq = 0.0;
};

template <typename T>
struct Scratch {
  std::vector<T> dist;      // group x tile_atoms
};

// Reduces one block of kReductionBlock terms: eight strided lanes, then a
// fixed pairwise tree. Every stage funnels its terms through here.
double reduce_block(const double* t) {
  constexpr std::size_t kLanes = 8;
  double acc[kLanes];
  for (std::size_t j = 0; j < kLanes; ++j) acc[j] = t[j];
  for (std::size_t k = kLanes; k < kReductionBlock; k += kLanes) {
    for (std::size_t j = 0; j < kLanes; ++j) acc[j] += t[k + j];
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

double tree_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return x[0];
  const std::size_t half = n / 2;
  return tree_sum(x, half) + tree_sum(x + half, n - half);
}

// Per-input Gaussian terms, pushed in atom order and folded into block sums.
// The last block of a range is zero padded.
class BlockReducer {
 public:
  BlockReducer(std::size_t inputs, std::size_t atoms)
      : stride_((atoms + kReductionBlock - 1) / kReductionBlock),
        blocks_(inputs * stride_, 0.0),
        buf_(inputs * kReductionBlock, 0.0),
        fill_(inputs, 0),
        written_(inputs, 0) {}

  template <typename T>
  void push(std::size_t g, const T* dist, const double* coeffs, std::size_t len, double scale) {
    double* buf = buf_.data() + g * kReductionBlock;
    while (len > 0) {
      const std::size_t take = std::min(len, kReductionBlock - fill_[g]);
      double* __restrict dst = buf + fill_[g];
      for (std::size_t a = 0; a < take; ++a) {
        dst[a] = coeffs[a] * detail::fast_exp(static_cast<double>(dist[a]) * scale);
      }
      fill_[g] += take;
      dist += take;
      coeffs += take;
      len -= take;
      if (fill_[g] == kReductionBlock) emit(g);
    }
  }

  /// Flushes the partial block and returns the tree sum of all blocks.
  double finish(std::size_t g) {
    if (fill_[g] > 0) {
      double* buf = buf_.data() + g * kReductionBlock;
      std::fill(buf + fill_[g], buf + kReductionBlock, 0.0);
      emit(g);
    }
    return tree_sum(blocks_.data() + g * stride_, written_[g]);
  }

 private:
  void emit(std::size_t g) {
    blocks_[g * stride_ + written_[g]++] = reduce_block(buf_.data() + g * kReductionBlock);
    fill_[g] = 0;
  }

  std::size_t stride_;
  std::vector<double> blocks_;
  std::vector<double> buf_;
  std::vector<std::size_t> fill_;
  std::vector<std::size_t> written_;
};

template <typename T>
inline T squared_distance(const T* u, const T* v, std::size_t dim) {
  T acc = 0;
  for (std::size_t d = 0; d < dim; ++d) {
    const T diff = u[d] - v[d];
    acc += diff * diff;
  }
  return acc;
}

// baseline and grouped: one full dictionary pass per input.
template <typename T>
void run_per_input(const Problem<T>& pb, std::size_t i0, std::size_t i1, std::size_t a0,
                   std::size_t a1, Scratch<T>& s, BlockReducer& red) {
  T* dist = s.dist.data();
  for (std::size_t i = i0; i < i1; ++i) {
    const T* u = pb.inputs + i * pb.dim;
    for (std::size_t b0 = a0; b0 < a1; b0 += kReductionBlock) {
      const std::size_t len = std::min(kReductionBlock, a1 - b0);
      for (std::size_t a = 0; a < len; ++a) {
        dist[a] = squared_distance(u, pb.atoms + (b0 + a) * pb.dim, pb.dim);
      }
      red.push(i - i0, dist, pb.coeffs + b0, len, pb.neg_inv_two_sigma_sq);
    }
  }
}

// Inputs compared against one atom at a time in the tiled stage; also the
// vector width of the balanced stage.
constexpr std::size_t kTileLanes = 8;

template <typename T>
using Lane [[gnu::vector_size(kTileLanes * sizeof(T))]] = T;
// Register block of the balanced stage: inputs x atoms.
constexpr std::size_t kBalancedInputs = 2;
constexpr std::size_t kAtomBlock = 32;

// tiled: each atom of a slice is compared against up to kTileLanes inputs of
// the group at a time, keeping one running distance per input. Operands stay
// in their row-major layout.
template <std::size_t Rows, typename T>
[[gnu::noinline]] void tiled_pass(const Problem<T>& pb, const T* first_row, std::size_t t0, std::size_t len,
                T* dist, std::size_t ta) {
  const std::size_t dim = pb.dim;
  const T* rows[Rows];
  for (std::size_t k = 0; k < Rows; ++k) rows[k] = first_row + k * dim;
  for (std::size_t a = 0; a < len; ++a) {
    const T* atom = pb.atoms + (t0 + a) * dim;
    T acc[Rows] = {};
    for (std::size_t d = 0; d < dim; ++d) {
      const T v = atom[d];
      for (std::size_t k = 0; k < Rows; ++k) {
        const T e = rows[k][d] - v;
        acc[k] += e * e;
      }
    }
    for (std::size_t k = 0; k < Rows; ++k) dist[k * ta + a] = acc[k];
  }
}

template <typename T>
void run_tiled(const Problem<T>& pb, std::size_t i0, std::size_t i1, std::size_t a0,
               std::size_t a1, Scratch<T>& s, BlockReducer& red) {
  const std::size_t dim = pb.dim;
  const std::size_t ta = pb.tile_atoms;
  const std::size_t group = i1 - i0;
  for (std::size_t t0 = a0; t0 < a1; t0 += ta) {
    const std::size_t len = std::min(ta, a1 - t0);
    // Clamped rows repeat the last input when fewer than kTileLanes remain.
    std::size_t g = 0;
    while (group - g > kTileLanes / 2) {
      const std::size_t width = std::min(kTileLanes, group - g);
      const T* rows[kTileLanes];
      for (std::size_t k = 0; k < kTileLanes; ++k) {
        rows[k] = pb.inputs + (i0 + g + std::min(k, width - 1)) * dim;
      }
      for (std::size_t a = 0; a < len; ++a) {
        const T* atom = pb.atoms + (t0 + a) * dim;
        T acc[kTileLanes] = {};
        for (std::size_t d = 0; d < dim; ++d) {
          const T v = atom[d];
          for (std::size_t k = 0; k < kTileLanes; ++k) {
            const T e = rows[k][d] - v;
            acc[k] += e * e;
          }
        }
        for (std::size_t k = 0; k < width; ++k) s.dist[(g + k) * ta + a] = acc[k];
      }
      g += width;
    }
    // At most kTileLanes / 2 rows are left; they go through passes of 4, 2 and 1.
    if (group - g >= 4) {
      tiled_pass<4>(pb, pb.inputs + (i0 + g) * dim, t0, len, s.dist.data() + g * ta, ta);
      g += 4;
    }
    if (group - g >= 2) {
      tiled_pass<2>(pb, pb.inputs + (i0 + g) * dim, t0, len, s.dist.data() + g * ta, ta);
      g += 2;
    }
    if (group - g >= 1) {
      tiled_pass<1>(pb, pb.inputs + (i0 + g) * dim, t0, len, s.dist.data() + g * ta, ta);
    }
    for (std::size_t k = 0; k < group; ++k) {
      red.push(k, s.dist.data() + k * ta, pb.coeffs + t0, len, pb.neg_inv_two_sigma_sq);
    }
  }
}

// balanced: slices are packed dim-major (stride padded to whole atom
// blocks) so vectors run across atoms. A register block of kBalancedInputs
// inputs x kAtomBlock atoms accumulates chunk_dim dimensions before its
// partial distances go back to scratch.
template <typename T, std::size_t Inputs>
void balanced_block(const Problem<T>& pb, const T* slice, std::size_t c0, std::size_t c1,
                    const T* const* u, T* const* drow, std::size_t a) {
  constexpr std::size_t kVecs = kAtomBlock / kTileLanes;
  const std::size_t stride = pb.packed_stride;
  Lane<T> acc[Inputs][kVecs];
  for (std::size_t i = 0; i < Inputs; ++i) {
    for (std::size_t v = 0; v < kVecs; ++v) {
      std::memcpy(&acc[i][v], drow[i] + a + v * kTileLanes, sizeof(Lane<T>));
    }
  }
  for (std::size_t d = c0; d < c1; ++d) {
    const T* row = slice + d * stride + a;
    for (std::size_t v = 0; v < kVecs; ++v) {
      Lane<T> r;
      std::memcpy(&r, row + v * kTileLanes, sizeof r);
      for (std::size_t i = 0; i < Inputs; ++i) {
        const Lane<T> e = r - u[i][d];
        acc[i][v] += e * e;
      }
    }
  }
  for (std::size_t i = 0; i < Inputs; ++i) {
    for (std::size_t v = 0; v < kVecs; ++v) {
      std::memcpy(drow[i] + a + v * kTileLanes, &acc[i][v], sizeof(Lane<T>));
    }
  }
}

template <typename T>
void run_balanced(const Problem<T>& pb, std::size_t i0, std::size_t i1, std::size_t a0,
                  std::size_t a1, Scratch<T>& s, BlockReducer& red) {
  const std::size_t ta = pb.tile_atoms;
  const std::size_t stride = pb.packed_stride;
  const std::size_t dim = pb.dim;
  const std::size_t group = i1 - i0;
  for (std::size_t t0 = a0; t0 < a1; t0 += ta) {
    const std::size_t len = std::min(ta, a1 - t0);
    const std::size_t span = (len + kAtomBlock - 1) / kAtomBlock * kAtomBlock;
    const T* slice = pb.packed + (t0 / ta) * stride * dim;
    std::fill(s.dist.begin(), s.dist.begin() + group * stride, T{0});
    for (std::size_t c0 = 0; c0 < dim; c0 += pb.chunk_dim) {
      const std::size_t c1 = std::min(dim, c0 + pb.chunk_dim);
      std::size_t g = 0;
      for (; g + kBalancedInputs <= group; g += kBalancedInputs) {
        const T* u[kBalancedInputs];
        T* drow[kBalancedInputs];
        for (std::size_t i = 0; i < kBalancedInputs; ++i) {
          u[i] = pb.inputs + (i0 + g + i) * dim;
          drow[i] = s.dist.data() + (g + i) * stride;
        }
        for (std::size_t a = 0; a < span; a += kAtomBlock) {
          balanced_block<T, kBalancedInputs>(pb, slice, c0, c1, u, drow, a);
        }
      }
      for (; g < group; ++g) {
        const T* u[1] = {pb.inputs + (i0 + g) * dim};
        T* drow[1] = {s.dist.data() + g * stride};
        for (std::size_t a = 0; a < span; a += kAtomBlock) {
          balanced_block<T, 1>(pb, slice, c0, c1, u, drow, a);
        }
      }
    }
    for (std::size_t g = 0; g < group; ++g) {
      red.push(g, s.dist.data() + g * stride, pb.coeffs + t0, len, pb.neg_inv_two_sigma_sq);
    }
  }
}

template <typename T>
std::vector<T> convert(std::span<const double> xs) {
  return std::vector<T>(xs.begin(), xs.end());
}

// Whole atom blocks plus one lane vector, so that rows of a slice do not sit
// a power of two apart and collide in the same cache sets.
std::size_t packed_stride(std::size_t ta) {
  return (ta + kAtomBlock - 1) / kAtomBlock * kAtomBlock + kTileLanes;
}

template <typename T>
std::vector<T> pack_slices(std::span<const T> atoms, std::size_t n, std::size_t dim,
                           std::size_t ta) {
  const std::size_t slices = (n + ta - 1) / ta;
  const std::size_t stride = packed_stride(ta);
  std::vector<T> packed(slices * stride * dim, T{0});
  for (std::size_t a = 0; a < n; ++a) {
    T* slice = packed.data() + (a / ta) * stride * dim;
    const std::size_t col = a % ta;
    for (std::size_t d = 0; d < dim; ++d) slice[d * stride + col] = atoms[a * dim + d];
  }
  return packed;
}

template <typename T>
void gaussian_sums(const FilterState& f, std::span<const double> inputs_d, std::size_t count,
                   const KernelParams& p, const EngineConfig& cfg, std::vector<double>& out) {
  const std::size_t dim = f.dim();
  const std::size_t n = f.atom_count();

  std::vector<T> inputs_t, atoms_t;
  const T* inputs = nullptr;
  const T* atoms = nullptr;
  if constexpr (std::is_same_v<T, double>) {
    inputs = inputs_d.data();
    atoms = f.atom_data().data();
  } else {
    inputs_t = convert<T>(inputs_d);
    atoms_t = convert<T>(f.atom_data());
    inputs = inputs_t.data();
    atoms = atoms_t.data();
  }
  std::vector<T> packed;
  if (cfg.stage == Stage::balanced) {
    packed = pack_slices<T>(std::span<const T>(atoms, n * dim), n, dim, cfg.tile_atoms);
  }

  Problem<T> pb;
  pb.inputs = inputs;
  pb.atoms = atoms;
  pb.packed = packed.data();
  pb.packed_stride = packed_stride(cfg.tile_atoms);
  pb.coeffs = f.coeffs().data();
  pb.dim = dim;
  pb.n_atoms = n;
  pb.tile_atoms = cfg.tile_atoms;
  pb.chunk_dim = cfg.chunk_dim;
  pb.neg_inv_two_sigma_sq = -1.0 / (2.0 * p.sigma_sq);

  const std::size_t group = cfg.stage == Stage::baseline ? 1 : cfg.tile_inputs;
  const std::size_t groups = (count + group - 1) / group;

  // Dictionary parts per group; more than one only without deterministic
  // reduction. Part boundaries stay slice-aligned for the packed layout.
  std::size_t parts = 1;
  if (!cfg.deterministic_reduction && groups < cfg.workers) {
    parts = std::min((cfg.workers + groups - 1) / groups,
                     std::max<std::size_t>(1, (n + cfg.tile_atoms - 1) / cfg.tile_atoms));
  }
  const std::size_t slices = (n + cfg.tile_atoms - 1) / cfg.tile_atoms;
  const std::size_t slices_per_part = (slices + parts - 1) / parts;

  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  std::vector<Scratch<T>> scratch(workers);
  std::mutex merge_mutex;

  parallel_for(groups * parts, workers, [&](std::size_t task, std::size_t worker) {
    const std::size_t gi = task / parts;
    const std::size_t part = task % parts;
    const std::size_t i0 = gi * group;
    const std::size_t i1 = std::min(count, i0 + group);
    const std::size_t a0 = std::min(n, part * slices_per_part * cfg.tile_atoms);
    const std::size_t a1 = std::min(n, (part + 1) * slices_per_part * cfg.tile_atoms);

    Scratch<T>& s = scratch[worker];
    const std::size_t rows = std::max(packed_stride(cfg.tile_atoms), kReductionBlock);
    if (s.dist.size() < group * rows) s.dist.resize(group * rows);

    BlockReducer red(i1 - i0, a1 - a0);
    if (a1 > a0) {
      switch (cfg.stage) {
        case Stage::baseline:
        case Stage::grouped: run_per_input(pb, i0, i1, a0, a1, s, red); break;
        case Stage::tiled: run_tiled(pb, i0, i1, a0, a1, s, red); break;
        case Stage::balanced: run_balanced(pb, i0, i1, a0, a1, s, red); break;
      }
    }

    if (parts == 1) {
      for (std::size_t i = i0; i < i1; ++i) out[i] = red.finish(i - i0);
    } else {
      std::lock_guard lock(merge_mutex);
      for (std::size_t i = i0; i < i1; ++i) out[i] += red.finish(i - i0);
    }
  });
}

}  // namespace

std::vector<double> batch_evaluate(const FilterState& f, std::span<const double> inputs,
                                   std::size_t count, const KernelParams& p,
                                   const EngineConfig& cfg) {
  cfg.validate();
  const std::size_t dim = f.dim();
  if (inputs.size() != count * dim) {
    throw DimensionError("input batch holds " + std::to_string(inputs.size()) +
                         " values, expected " + std::to_string(count) + " x " +
                         std::to_string(dim));
  }
  std::vector<double> out(count, 0.0);
  if (count == 0) return out;

  if (!f.empty()) {
    if (!(p.sigma_sq > 0.0)) throw ParameterError("sigma_sq must be positive");
    if (cfg.precision == Precision::f64) {
      gaussian_sums<double>(f, inputs, count, p, cfg, out);
    } else {
      gaussian_sums<float>(f, inputs, count, p, cfg, out);
    }
  }

  const auto theta = f.theta();
  for (std::size_t i = 0; i < count; ++i) {
    const double* u = inputs.data() + i * dim;
    double linear = 0.0;
    for (std::size_t d = 0; d < dim; ++d) linear += theta[d] * u[d];
    out[i] = f.empty() ? linear : linear + p.w_gaussian * out[i];
  }
  return out;
}

std::vector<double> batch_evaluate(const FilterState& f, std::span<const RealVector> inputs,
                                   const KernelParams& p, const EngineConfig& cfg) {
  const std::size_t dim = f.dim();
  std::vector<double> flat;
  flat.reserve(inputs.size() * dim);
  for (const auto& u : inputs) {
    if (u.size() != dim) {
      throw DimensionError("input of length " + std::to_string(u.size()) +
                           " for a filter of dimension " + std::to_string(dim));
    }
    flat.insert(flat.end(), u.begin(), u.end());
  }
  return batch_evaluate(f, flat, inputs.size(), p, cfg);
}

std::vector<std::complex<double>> batch_detect(const FilterState& f,
                                               std::span<const ComplexVector> inputs,
                                               const KernelParams& p, const EngineConfig& cfg) {
  const std::size_t dim = f.dim();
  std::vector<double> flat;
  flat.reserve(2 * inputs.size() * dim);
  for (const auto& r : inputs) {
    if (2 * r.size() != dim) {
      throw DimensionError("receive vector with M = " + std::to_string(r.size()) +
                           " for a filter of dimension " + std::to_string(dim));
    }
    const auto [r1, r2] = realify(r);
    flat.insert(flat.end(), r1.begin(), r1.end());
    flat.insert(flat.end(), r2.begin(), r2.end());
  }
  const std::vector<double> y = batch_evaluate(f, flat, 2 * inputs.size(), p, cfg);
  std::vector<std::complex<double>> out(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

}  // namespace apsm
