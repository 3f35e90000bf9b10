// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "apsm/errors.hpp"
#include "apsm/io.hpp"
#include "le_bytes.hpp"

namespace apsm::io {

void write_model(std::ostream& out, const FilterState& filter, const KernelParams& params) {
  if (filter.dim() % 2 != 0) throw DimensionError("model filter dimension must be even (2M)");
  out.write(kModelMagic, sizeof kModelMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(filter.dim() / 2));
  detail::put_u32(out, static_cast<std::uint32_t>(filter.atom_count()));
  detail::put_f64(out, params.w_linear);
  detail::put_f64(out, params.w_gaussian);
  detail::put_f64(out, params.sigma_sq);
  for (double x : filter.theta()) detail::put_f64(out, x);
  for (double x : filter.atom_data()) detail::put_f64(out, x);
  for (double x : filter.coeffs()) detail::put_f64(out, x);
  if (!out) throw std::runtime_error("failed writing model stream");
}

void write_model_file(const std::filesystem::path& path, const FilterState& filter,
                      const KernelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(out, filter, params);
}

Model read_model(std::istream& in) {
  detail::Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic, "model magic");
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) throw FormatError("bad model magic", 0);

  const std::uint32_t m = r.u32("antenna count");
  const std::uint32_t atoms = r.u32("atom count");
  if (m == 0) throw FormatError("model declares zero antennas", 8);

  Model model;
  model.params.w_linear = r.f64("w_L");
  model.params.w_gaussian = r.f64("w_G");
  model.params.sigma_sq = r.f64("sigma_sq");
  try {
    model.params.validate();
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid kernel parameters: ") + e.what(), 16);
  }

  const std::size_t dim = 2 * static_cast<std::size_t>(m);
  RealVector theta(dim);
  for (double& x : theta) x = r.f64("theta");
  model.filter = FilterState::from_theta(std::move(theta));
  model.filter.reserve_atoms(atoms);

  std::vector<double> atom_data(static_cast<std::size_t>(atoms) * dim);
  for (double& x : atom_data) x = r.f64("atoms");
  for (std::uint32_t i = 0; i < atoms; ++i) {
    const double c = r.f64("coeffs");
    model.filter.append_atom(std::span<const double>(atom_data.data() + i * dim, dim), c);
  }
  return model;
}

Model read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

}  // namespace apsm::io
