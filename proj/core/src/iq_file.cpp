// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "apsm/errors.hpp"
#include "apsm/io.hpp"
#include "le_bytes.hpp"

namespace apsm::io {

void write_iq(std::ostream& out, std::span<const ComplexVector> samples, std::uint32_t antennas) {
  for (const auto& s : samples) {
    if (s.size() != antennas) {
      throw DimensionError("IQ sample has " + std::to_string(s.size()) + " antennas, header says " +
                           std::to_string(antennas));
    }
  }
  out.write(kIqMagic, sizeof kIqMagic);
  detail::put_u32(out, antennas);
  detail::put_u32(out, static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) {
    for (const auto& x : s) {
      detail::put_f32(out, static_cast<float>(x.real()));
      detail::put_f32(out, static_cast<float>(x.imag()));
    }
  }
  if (!out) throw std::runtime_error("failed writing IQ stream");
}

void write_iq_file(const std::filesystem::path& path, std::span<const ComplexVector> samples,
                   std::uint32_t antennas) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_iq(out, samples, antennas);
}

IqHeader read_iq_header(std::istream& in) {
  detail::Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic, "IQ magic");
  if (std::memcmp(magic, kIqMagic, sizeof magic) != 0) {
    throw FormatError("bad IQ magic", 0);
  }
  IqHeader h;
  h.antennas = r.u32("antenna count");
  h.sample_count = r.u32("sample count");
  if (h.antennas == 0) throw FormatError("IQ header declares zero antennas", 8);
  return h;
}

IqStreamReader::IqStreamReader(std::istream& in)
    : in_(in), header_(read_iq_header(in)), remaining_(header_.sample_count) {}

std::vector<ComplexVector> IqStreamReader::next(std::size_t max_samples) {
  const std::size_t n = std::min(max_samples, remaining_);
  detail::Reader r(in_, offset_);
  std::vector<ComplexVector> samples(n, ComplexVector(header_.antennas));
  for (auto& s : samples) {
    for (auto& x : s) {
      const float re = r.f32("IQ payload");
      const float im = r.f32("IQ payload");
      x = {re, im};
    }
  }
  offset_ = r.offset();
  remaining_ -= n;
  return samples;
}

std::vector<ComplexVector> read_iq(std::istream& in, IqHeader* header) {
  IqStreamReader reader(in);
  if (header) *header = reader.header();
  return reader.next(reader.remaining());
}

std::vector<ComplexVector> read_iq_file(const std::filesystem::path& path, IqHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_iq(in, header);
}

void write_symbols_f32(std::ostream& out, std::span<const std::complex<double>> symbols) {
  for (const auto& s : symbols) {
    detail::put_f32(out, static_cast<float>(s.real()));
    detail::put_f32(out, static_cast<float>(s.imag()));
  }
  if (!out) throw std::runtime_error("failed writing symbol stream");
}

std::vector<std::complex<float>> read_symbols_f32(std::istream& in) {
  std::vector<std::complex<float>> out;
  detail::Reader r(in);
  while (in.peek() != std::char_traits<char>::eof()) {
    const float re = r.f32("symbol stream");
    const float im = r.f32("symbol stream");
    out.emplace_back(re, im);
  }
  return out;
}

}  // namespace apsm::io
