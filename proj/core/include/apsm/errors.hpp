// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apsm {

/// Vector lengths that must agree do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel, learner or engine parameter is outside its valid range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// kappa(r, r) == 0: the projection onto the consistency set of r is undefined.
class DegenerateSampleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The Gaussian dictionary reached ApsmConfig::max_atoms.
class DictionaryFullError : public std::runtime_error {
 public:
  DictionaryFullError(std::size_t cap)
      : std::runtime_error("Gaussian dictionary cap of " + std::to_string(cap) +
                           " atoms exceeded"),
        cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Bit stream length is not a multiple of the bits-per-symbol of a scheme.
class FramingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary container (IQ or model file).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace apsm
