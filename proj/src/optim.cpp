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

#include "cvconv/optim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "cvconv/errors.hpp"

namespace cvconv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1): one independent draw per
// (seed, particle, iteration, slot), so the schedule never changes results.
double uniform(std::uint64_t seed, int particle, int iter, int slot) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(particle));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(iter) << 20));
    h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr double kWorst = -std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isfinite(v) ? v : kWorst; }

}  // namespace

void validate(const PsoConfig &cfg) {
    if (cfg.swarm_size < 2) throw InvalidSpec("pso: swarm_size must be at least 2");
    if (cfg.max_iters < 0) throw InvalidSpec("pso: max_iters must be nonnegative");
    if (cfg.restarts < 1) throw InvalidSpec("pso: restarts must be at least 1");
    if (cfg.stall_window < 1) throw InvalidSpec("pso: stall_window must be at least 1");
    if (cfg.threads < 0) throw InvalidSpec("pso: threads must be nonnegative");
    if (!(cfg.stall_tolerance >= 0.0)) throw InvalidSpec("pso: stall_tolerance must be nonnegative");
    for (double v : {cfg.inertia, cfg.c1, cfg.c2}) {
        if (!std::isfinite(v)) throw InvalidSpec("pso: non-finite coefficient");
    }
    for (auto [lo, hi] : cfg.bounds) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw InvalidSpec("pso: invalid bound interval");
    }
}

void parallel_for(int n, int threads, const std::function<void(int)> &fn) {
    if (n <= 0) return;
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](int w) {
        // static interleaved assignment
        for (int i = w; i < n; i += workers) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

PsoResult pso_maximize(const Objective &objective, const PsoConfig &cfg, std::span<const std::vector<double>> seeds) {
    validate(cfg);
    if (cfg.bounds.empty()) throw InvalidSpec("pso: bounds are empty");
    const int S = cfg.swarm_size;
    const int D = static_cast<int>(cfg.bounds.size());
    if (static_cast<int>(seeds.size()) > S) throw InvalidSpec("pso: more seed particles than swarm_size");

    std::vector<std::vector<double>> x(S, std::vector<double>(D)), v = x;
    for (int p = 0; p < S; ++p) {
        for (int d = 0; d < D; ++d) {
            const auto [lo, hi] = cfg.bounds[d];
            x[p][d] = lo + uniform(cfg.seed, p, 0, 2 * d) * (hi - lo);
            v[p][d] = (uniform(cfg.seed, p, 0, 2 * d + 1) - 0.5) * 0.2 * (hi - lo);
        }
    }
    for (std::size_t p = 0; p < seeds.size(); ++p) {
        if (static_cast<int>(seeds[p].size()) != D) throw InvalidSpec("pso: seed particle has wrong dimension");
        for (int d = 0; d < D; ++d) x[p][d] = std::clamp(seeds[p][d], cfg.bounds[d].first, cfg.bounds[d].second);
    }

    PsoResult res;
    std::vector<double> val(S);
    auto evaluate = [&] {
        parallel_for(S, cfg.threads, [&](int p) { val[p] = sanitize(objective(x[p])); });
        res.evaluations += S;
    };

    evaluate();
    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pval = val;
    int g = static_cast<int>(std::max_element(pval.begin(), pval.end()) - pval.begin());
    res.best_params = pbest[g];
    res.best_value = pval[g];
    res.trace.push_back(res.best_value);

    for (int it = 1; it <= cfg.max_iters; ++it) {
        for (int p = 0; p < S; ++p) {
            for (int d = 0; d < D; ++d) {
                const auto [lo, hi] = cfg.bounds[d];
                const double span = hi - lo;
                const double r1 = uniform(cfg.seed, p, it, 2 * d);
                const double r2 = uniform(cfg.seed, p, it, 2 * d + 1);
                double vel = cfg.inertia * v[p][d] + cfg.c1 * r1 * (pbest[p][d] - x[p][d]) +
                             cfg.c2 * r2 * (res.best_params[d] - x[p][d]);
                vel = std::clamp(vel, -span, span);
                double pos = x[p][d] + vel;
                // reflect off the walls
                if (pos > hi) {
                    pos = hi - (pos - hi);
                    vel = -vel;
                }
                if (pos < lo) {
                    pos = lo + (lo - pos);
                    vel = -vel;
                }
                x[p][d] = std::clamp(pos, lo, hi);
                v[p][d] = vel;
            }
        }
        evaluate();
        for (int p = 0; p < S; ++p) {
            if (val[p] > pval[p]) {
                pval[p] = val[p];
                pbest[p] = x[p];
            }
        }
        // lowest index wins ties, independent of scheduling
        for (int p = 0; p < S; ++p) {
            if (pval[p] > res.best_value) {
                res.best_value = pval[p];
                res.best_params = pbest[p];
            }
        }
        res.trace.push_back(res.best_value);
        if (it >= cfg.stall_window && res.trace[it] - res.trace[it - cfg.stall_window] < cfg.stall_tolerance) break;
    }
    return res;
}

ConversionResult optimize_conversion(const StateSpec &input, const StateSpec &target, ChannelFamily family,
                                     const PsoConfig &cfg, const std::optional<PhaseGrid> &grid) {
    validate(cfg);
    return optimize_conversion(input, target, prepare(build_state_auto(input)), prepare(build_state_auto(target)),
                               family, cfg, grid);
}

ConversionResult optimize_conversion(const StateSpec &input, const StateSpec &target, const PreparedPtr &in_state,
                                     const PreparedPtr &target_state, ChannelFamily family, const PsoConfig &cfg,
                                     const std::optional<PhaseGrid> &grid) {
    validate(cfg);
    PsoConfig run = cfg;
    if (run.bounds.empty()) run.bounds = default_bounds(family);
    if (static_cast<int>(run.bounds.size()) != parameter_count(family)) {
        throw InvalidSpec("bounds have " + std::to_string(run.bounds.size()) + " entries, family " +
                          family_name(family) + " needs " + std::to_string(parameter_count(family)));
    }

    const FidelityEvaluator ev(in_state, target_state);
    const Objective objective = [&](std::span<const double> p) {
        const GaussianChannel ch = decode(family, p);
        return grid ? ev.on_grid(ch, *grid) : ev(ch);
    };

    ConversionResult out;
    out.input = input;
    out.target = target;
    out.family = family;
    out.seed = cfg.seed;
    out.restarts = cfg.restarts;
    out.input_dim = in_state->dim;
    out.target_dim = target_state->dim;
    out.grid = grid;

    const std::vector<double> id = identity_parameters(family);
    out.fidelity_init = objective(id);
    const std::vector<std::vector<double>> seeds = {id};

    bool have = false;
    for (int k = 0; k < cfg.restarts; ++k) {
        run.seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(k) * 0x632be59bd9b4e019ULL);
        PsoResult r = pso_maximize(objective, run, seeds);
        out.evaluations += r.evaluations;
        if (!have || r.best_value > out.fidelity_best) {
            have = true;
            out.fidelity_best = r.best_value;
            out.best_params = std::move(r.best_params);
            out.trace = std::move(r.trace);
        }
    }
    out.best_channel = decode(family, out.best_params);
    return out;
}

std::vector<ConversionResult> sweep(const std::vector<StateSpec> &inputs, const std::vector<StateSpec> &targets,
                                    ChannelFamily family, const PsoConfig &cfg, const std::optional<PhaseGrid> &grid,
                                    const CellCallback &on_cell, const std::function<bool(int, int)> &skip) {
    // states are built once and shared by every cell that uses them
    struct Slot {
        bool tried = false;
        PreparedPtr state;
        std::string error;
    };
    std::vector<Slot> in_slots(inputs.size()), tgt_slots(targets.size());
    auto get = [](Slot &slot, const StateSpec &spec) {
        if (!slot.tried) {
            slot.tried = true;
            try {
                slot.state = prepare(build_state_auto(spec));
            } catch (const std::exception &e) {
                slot.error = e.what();
            }
        }
        if (!slot.state) throw Error(slot.error.empty() ? "state preparation failed" : slot.error);
        return slot.state;
    };

    std::vector<ConversionResult> out;
    for (int i = 0; i < static_cast<int>(inputs.size()); ++i) {
        for (int j = 0; j < static_cast<int>(targets.size()); ++j) {
            if (skip && skip(i, j)) continue;
            ConversionResult r;
            try {
                r = optimize_conversion(inputs[i], targets[j], get(in_slots[i], inputs[i]), get(tgt_slots[j], targets[j]),
                                        family, cfg, grid);
            } catch (const std::exception &e) {
                r = ConversionResult{};
                r.input = inputs[i];
                r.target = targets[j];
                r.family = family;
                r.seed = cfg.seed;
                r.restarts = cfg.restarts;
                r.grid = grid;
                r.error = e.what();
                if (r.error.empty()) r.error = "unknown error";
            }
            if (on_cell) on_cell(i, j, r);
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace cvconv
