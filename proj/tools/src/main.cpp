// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "apsm/cli/commands.hpp"

int main(int argc, char** argv) {
  return apsm::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
