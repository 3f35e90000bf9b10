// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace apsm {

/// Runs body(task, worker) for every task in [0, tasks) on `workers` threads
/// (the calling thread is worker 0). Tasks are claimed dynamically, so which
/// worker runs a task is unspecified; results must not depend on it. The
/// first exception thrown by a task is rethrown after all workers joined.
void parallel_for(std::size_t tasks, std::size_t workers,
                  const std::function<void(std::size_t task, std::size_t worker)>& body);

/// Number of hardware threads, at least 1.
std::size_t hardware_workers();

}  // namespace apsm
