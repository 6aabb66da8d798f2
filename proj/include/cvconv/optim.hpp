// Copyright 2026 The cvconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvconv/channel.hpp"
#include "cvconv/phasespace.hpp"
#include "cvconv/statelib.hpp"

namespace cvconv {

struct PsoConfig {
    int swarm_size = 256;
    int max_iters = 400;
    double inertia = 0.729;
    double c1 = 1.49445;
    double c2 = 1.49445;
    std::uint64_t seed = 20260101;
    /// Empty means the channel family's default bounds.
    std::vector<std::pair<double, double>> bounds;
    /// Stop when the best value gains less than this over `stall_window` iterations.
    double stall_tolerance = 1e-6;
    int stall_window = 40;
    /// Independent swarms per conversion; the best is kept.
    int restarts = 4;
    /// Worker threads for objective evaluation; 0 uses the hardware count.
    int threads = 0;
};

/// Throws InvalidSpec on empty or inverted bounds, swarm_size < 2, and similar.
void validate(const PsoConfig &cfg);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown on the caller, lowest index first.
void parallel_for(int n, int threads, const std::function<void(int)> &fn);

using Objective = std::function<double(std::span<const double>)>;

struct PsoResult {
    std::vector<double> best_params;
    double best_value = 0.0;
    /// Best value after initialization (entry 0) and after each iteration.
    std::vector<double> trace;
    long evaluations = 0;
};

/// One swarm maximizing `objective` inside cfg.bounds. `seeds` are placed as
/// the first particles. Non-finite objective values rank below everything.
PsoResult pso_maximize(const Objective &objective, const PsoConfig &cfg,
                       std::span<const std::vector<double>> seeds = {});

struct ConversionResult {
    StateSpec input;
    StateSpec target;
    ChannelFamily family = ChannelFamily::FullCptp;
    GaussianChannel best_channel;
    std::vector<double> best_params;
    double fidelity_init = 0.0;
    double fidelity_best = 0.0;
    /// Per-iteration best over the restart that produced the winner.
    std::vector<double> trace;
    std::uint64_t seed = 0;
    int restarts = 0;
    long evaluations = 0;
    int input_dim = 0;
    int target_dim = 0;
    /// Fixed quadrature grid; empty means the adaptive lattice.
    std::optional<PhaseGrid> grid;
    /// Set for sweep cells that failed; the numeric fields are then unset.
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Multi-start PSO over `family`. Every restart seeds one particle with the
/// identity channel, so fidelity_best >= fidelity_init.
ConversionResult optimize_conversion(const StateSpec &input, const StateSpec &target, ChannelFamily family,
                                     const PsoConfig &cfg, const std::optional<PhaseGrid> &grid = std::nullopt);

/// Same, with both states already prepared.
ConversionResult optimize_conversion(const StateSpec &input, const StateSpec &target, const PreparedPtr &in_state,
                                     const PreparedPtr &target_state, ChannelFamily family, const PsoConfig &cfg,
                                     const std::optional<PhaseGrid> &grid = std::nullopt);

/// Called after each finished cell with (input index, target index, result).
using CellCallback = std::function<void(int, int, const ConversionResult &)>;

/// Cross product of inputs and targets, row-major by input. A failing cell
/// records its error message and the sweep continues. `skip(i, j)` returning
/// true leaves that cell out of both the run and the returned list.
std::vector<ConversionResult> sweep(const std::vector<StateSpec> &inputs, const std::vector<StateSpec> &targets,
                                    ChannelFamily family, const PsoConfig &cfg,
                                    const std::optional<PhaseGrid> &grid = std::nullopt,
                                    const CellCallback &on_cell = {},
                                    const std::function<bool(int, int)> &skip = {});

}  // namespace cvconv
