// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Binary containers. All fields are little-endian.
//
// IQ file: 16-byte header {magic "APSMIQ\0\0", u32 M, u32 sample_count}
// followed by sample_count x M float32 (I, Q) pairs, antenna-major within
// each time sample.
//
// Model file: {magic "APSMMDL1", u32 M, u32 atom_count, f64 w_L, f64 w_G,
// f64 sigma_sq, f64 theta[2M], f64 atoms[atom_count][2M], f64 coeffs[atom_count]}.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "apsm/learner.hpp"
#include "apsm/rkhs.hpp"

namespace apsm::io {

inline constexpr char kIqMagic[8] = {'A', 'P', 'S', 'M', 'I', 'Q', '\0', '\0'};
inline constexpr char kModelMagic[8] = {'A', 'P', 'S', 'M', 'M', 'D', 'L', '1'};
inline constexpr std::size_t kIqHeaderBytes = 16;

struct IqHeader {
  std::uint32_t antennas = 0;
  std::uint32_t sample_count = 0;
};

/// Throws DimensionError if any sample does not have `antennas` entries.
void write_iq(std::ostream& out, std::span<const ComplexVector> samples, std::uint32_t antennas);
void write_iq_file(const std::filesystem::path& path, std::span<const ComplexVector> samples,
                   std::uint32_t antennas);

IqHeader read_iq_header(std::istream& in);

/// Reads an IQ stream in bounded chunks after validating the header.
class IqStreamReader {
 public:
  explicit IqStreamReader(std::istream& in);

  const IqHeader& header() const noexcept { return header_; }
  std::size_t remaining() const noexcept { return remaining_; }
  /// Up to `max_samples` samples; empty once the payload is exhausted.
  std::vector<ComplexVector> next(std::size_t max_samples);

 private:
  std::istream& in_;
  IqHeader header_;
  std::size_t remaining_ = 0;
  std::size_t offset_ = kIqHeaderBytes;
};

/// Throws FormatError (with byte offset) on bad magic or truncation.
std::vector<ComplexVector> read_iq(std::istream& in, IqHeader* header = nullptr);
std::vector<ComplexVector> read_iq_file(const std::filesystem::path& path,
                                        IqHeader* header = nullptr);

/// Headerless float32 (I, Q) pairs.
void write_symbols_f32(std::ostream& out, std::span<const std::complex<double>> symbols);
std::vector<std::complex<float>> read_symbols_f32(std::istream& in);

struct Model {
  FilterState filter;
  KernelParams params;
};

void write_model(std::ostream& out, const FilterState& filter, const KernelParams& params);
void write_model_file(const std::filesystem::path& path, const FilterState& filter,
                      const KernelParams& params);
Model read_model(std::istream& in);
Model read_model_file(const std::filesystem::path& path);

}  // namespace apsm::io
