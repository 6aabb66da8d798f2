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

// Command-line front end: state, fidelity, convert, sweep, negativity-match, wigner.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvconv/channel.hpp"
#include "cvconv/errors.hpp"
#include "cvconv/fock.hpp"
#include "cvconv/io.hpp"
#include "cvconv/optim.hpp"
#include "cvconv/phasespace.hpp"
#include "cvconv/statelib.hpp"

namespace fs = std::filesystem;
using namespace cvconv;

namespace {

constexpr const char *kVersion = "0.1.0";

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kTruncation = 3, kConvention = 4 };

// ---------------------------------------------------------------------------
// Configuration: a flat map of dotted keys to JSON values.

void flatten_into(const Json &j, const std::string &prefix, Json &out) {
    if (j.is_object() && !j.empty()) {
        for (const auto &[k, v] : j.items()) flatten_into(v, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out[prefix] = j;
    }
}

Json parse_value(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception &) {
        return text;
    }
}

std::uint64_t fnv1a(const std::string &s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const std::set<std::string> kPsoKeys = {"pso.swarm_size", "pso.max_iters",       "pso.inertia",
                                         "pso.c1",         "pso.c2",              "pso.stall_tolerance",
                                         "pso.stall_window", "pso.restarts",      "pso.bounds"};

class Config {
  public:
    Config(std::string command, Json flat) : command_(std::move(command)), flat_(std::move(flat)) {}

    // Rejects keys outside `allowed` and the spec prefixes.
    void check_keys(const std::set<std::string> &allowed, const std::set<std::string> &spec_prefixes) const {
        for (const auto &[k, v] : flat_.items()) {
            if (allowed.count(k)) continue;
            bool ok = false;
            for (const auto &p : spec_prefixes) ok = ok || k == p || k.rfind(p + ".", 0) == 0;
            if (!ok) throw InvalidSpec("unknown config key '" + k + "' for command " + command_);
        }
        if (has("kind") && string("kind", "") != command_) {
            throw InvalidSpec("config kind '" + string("kind", "") + "' does not match command " + command_);
        }
    }

    bool has(const std::string &k) const { return flat_.contains(k); }

    double number(const std::string &k, double fallback) const {
        if (!has(k)) return fallback;
        if (!flat_.at(k).is_number()) throw InvalidSpec("config key '" + k + "' must be a number");
        return flat_.at(k).get<double>();
    }

    long long integer(const std::string &k, long long fallback) const {
        const double v = number(k, static_cast<double>(fallback));
        if (v != std::floor(v)) throw InvalidSpec("config key '" + k + "' must be an integer");
        return static_cast<long long>(v);
    }

    std::uint64_t unsigned_integer(const std::string &k, std::uint64_t fallback) const {
        if (!has(k)) return fallback;
        const Json &v = flat_.at(k);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
        throw InvalidSpec("config key '" + k + "' must be a nonnegative integer");
    }

    bool boolean(const std::string &k, bool fallback) const {
        if (!has(k)) return fallback;
        if (!flat_.at(k).is_boolean()) throw InvalidSpec("config key '" + k + "' must be true or false");
        return flat_.at(k).get<bool>();
    }

    std::string string(const std::string &k, const std::string &fallback) const {
        if (!has(k)) return fallback;
        if (!flat_.at(k).is_string()) throw InvalidSpec("config key '" + k + "' must be a string");
        return flat_.at(k).get<std::string>();
    }

    std::vector<double> numbers(const std::string &k) const {
        if (!has(k)) return {};
        const Json &v = flat_.at(k);
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array()) throw InvalidSpec("config key '" + k + "' must be a list of numbers");
        std::vector<double> out;
        for (const auto &e : v) {
            if (!e.is_number()) throw InvalidSpec("config key '" + k + "' must be a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    // A spec given either as a record string at `prefix` or as prefix.field keys.
    StateSpec spec(const std::string &prefix) const {
        if (has(prefix)) {
            const Json &v = flat_.at(prefix);
            if (v.is_string()) return parse_record(v.get<std::string>());
            throw InvalidSpec("config key '" + prefix + "' must be a state record string");
        }
        Json obj = Json::object();
        for (const auto &[k, v] : flat_.items()) {
            if (k.rfind(prefix + ".", 0) == 0) obj[k.substr(prefix.size() + 1)] = v;
        }
        if (obj.empty()) throw InvalidSpec("missing state spec '" + prefix + "'");
        return spec_from_json(obj);
    }

    bool has_prefix(const std::string &prefix) const {
        for (const auto &[k, v] : flat_.items()) {
            if (k == prefix || k.rfind(prefix + ".", 0) == 0) return true;
        }
        return false;
    }

    // inputs = ["record", ...] or inputs.base + inputs.key + inputs.values
    std::vector<StateSpec> spec_list(const std::string &prefix) const {
        std::vector<StateSpec> out;
        if (has(prefix)) {
            const Json &v = flat_.at(prefix);
            if (!v.is_array()) throw InvalidSpec("config key '" + prefix + "' must be a list of state records");
            for (const auto &e : v) {
                if (e.is_string()) out.push_back(parse_record(e.get<std::string>()));
                else if (e.is_object()) out.push_back(spec_from_json(e));
                else throw InvalidSpec("entries of '" + prefix + "' must be records or objects");
            }
            if (has(prefix + ".key") || has(prefix + ".values")) {
                throw InvalidSpec("give either '" + prefix + "' or '" + prefix + ".base/key/values', not both");
            }
            return out;
        }
        if (!has_prefix(prefix)) return out;
        Json base = spec_to_json(spec(prefix + ".base"));
        const std::string key = string(prefix + ".key", "");
        if (key.empty()) throw InvalidSpec("missing '" + prefix + ".key'");
        if (key == "family") throw InvalidSpec("'" + prefix + ".key' cannot be the family");
        // a *_db key replaces its linear counterpart
        if (key.size() > 3 && key.compare(key.size() - 3, 3, "_db") == 0) base.erase(key.substr(0, key.size() - 3));
        for (double v : numbers(prefix + ".values")) {
            Json j = base;
            j[key] = v;
            out.push_back(spec_from_json(j));
        }
        return out;
    }

    const Json &flat() const { return flat_; }

  private:
    std::string command_;
    Json flat_;
};

PsoConfig pso_from(const Config &c) {
    PsoConfig p;
    p.swarm_size = static_cast<int>(c.integer("pso.swarm_size", p.swarm_size));
    p.max_iters = static_cast<int>(c.integer("pso.max_iters", p.max_iters));
    p.inertia = c.number("pso.inertia", p.inertia);
    p.c1 = c.number("pso.c1", p.c1);
    p.c2 = c.number("pso.c2", p.c2);
    p.stall_tolerance = c.number("pso.stall_tolerance", p.stall_tolerance);
    p.stall_window = static_cast<int>(c.integer("pso.stall_window", p.stall_window));
    p.restarts = static_cast<int>(c.integer("pso.restarts", p.restarts));
    p.seed = c.unsigned_integer("seed", p.seed);
    p.threads = static_cast<int>(c.integer("threads", 0));
    if (c.has("pso.bounds")) {
        const Json &b = c.flat().at("pso.bounds");
        if (!b.is_array()) throw InvalidSpec("pso.bounds must be a list of [lo, hi] pairs");
        for (const auto &e : b) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw InvalidSpec("pso.bounds must be a list of [lo, hi] pairs");
            }
            p.bounds.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    }
    validate(p);
    return p;
}

std::optional<PhaseGrid> grid_from(const Config &c) {
    if (!c.has("grid.half_extent") && !c.has("grid.points")) return std::nullopt;
    return PhaseGrid::make(c.number("grid.half_extent", 8.0), static_cast<int>(c.integer("grid.points", 257)));
}

FockVector build(const Config &c, const StateSpec &s) {
    if (c.has("dim")) return build_state(s, static_cast<int>(c.integer("dim", kDefaultDim)));
    return build_state_auto(s);
}

// ---------------------------------------------------------------------------
// Output

struct Context {
    std::string command;
    Config config;
    std::string hash;
    fs::path out;
};

// Keys that cannot change numeric results stay out of the hash and the echo.
Json result_config(const Json &flat) {
    Json cfg = Json::object();
    for (const auto &[k, v] : flat.items()) {
        if (k != "output" && k != "threads") cfg[k] = v;
    }
    return cfg;
}

Json provenance(const Context &ctx) {
    Json p = Json::object();
    p["tool"] = "cvconv";
    p["version"] = kVersion;
    p["command"] = ctx.command;
    p["config_hash"] = ctx.hash;
    p["seed"] = ctx.config.unsigned_integer("seed", PsoConfig{}.seed);
    p["config"] = result_config(ctx.config.flat());
    return p;
}

void write_text(const fs::path &path, const std::string &text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("cannot write " + path.string());
        os << text;
        if (!os) throw Error("cannot write " + path.string());
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path &path, const Json &j) { write_text(path, j.dump(2) + "\n"); }

// Comment line carrying the config hash and seed, prepended to every CSV.
std::string csv_preamble(const Context &ctx) {
    return "# cvconv " + std::string(kVersion) + " " + ctx.command + " config_hash=" + ctx.hash +
           " seed=" + std::to_string(ctx.config.unsigned_integer("seed", PsoConfig{}.seed)) + "\n";
}

template <class Grid>
std::string to_csv(const Grid &g) {
    std::ostringstream os;
    write_csv(os, g);
    return os.str();
}

template <class Grid>
void write_grid_binary(const fs::path &path, const Grid &g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    write_binary(os, g);
}

// ---------------------------------------------------------------------------
// Commands

const std::set<std::string> kCommon = {"kind", "output", "seed", "threads", "dim"};

std::set<std::string> with_common(std::set<std::string> s) {
    s.insert(kCommon.begin(), kCommon.end());
    return s;
}

Json state_summary(const StateSpec &spec, const FockVector &psi) {
    Json j = Json::object();
    j["record"] = to_record(spec);
    j["spec"] = spec_to_json(spec);
    j["dim"] = psi.dim();
    j["mean_photon_number"] = mean_photon_number(psi);
    j["tail_mass"] = psi.tail_mass(5);
    return j;
}

int cmd_state(const Context &ctx) {
    const Config &c = ctx.config;
    c.check_keys(with_common({"grid.half_extent", "grid.points", "export.binary"}), {"state"});
    const StateSpec spec = c.spec("state");
    const FockVector psi = build_state(spec, static_cast<int>(c.integer("dim", kDefaultDim)));
    const auto fixed = grid_from(c);
    const PhaseGrid wgrid = fixed ? *fixed : default_grid(psi, displacement_scale(spec));
    // chi needs displacements up to E, which the truncation caps at 2 sqrt(dim)
    const PhaseGrid cgrid =
        fixed ? *fixed
              : PhaseGrid::make(std::min(wgrid.half_extent, 2.0 * std::sqrt(static_cast<double>(psi.dim()))),
                                wgrid.points);
    const WignerFn w = wigner_fn(psi, wgrid);
    const CharFn chi = char_fn(psi, cgrid);

    fs::create_directories(ctx.out);
    std::string amps = csv_preamble(ctx) + "n,re,im\n";
    for (int n = 0; n < psi.dim(); ++n) {
        amps += std::to_string(n) + "," + format_double(psi[n].real()) + "," + format_double(psi[n].imag()) + "\n";
    }
    write_text(ctx.out / "amplitudes.csv", amps);
    write_text(ctx.out / "wigner.csv", csv_preamble(ctx) + to_csv(w));
    write_text(ctx.out / "chi.csv", csv_preamble(ctx) + to_csv(chi));
    if (c.boolean("export.binary", false)) {
        write_grid_binary(ctx.out / "wigner.bin", w);
        write_grid_binary(ctx.out / "chi.bin", chi);
    }
    Json rep = state_summary(spec, psi);
    rep["wigner_log_negativity"] = wigner_log_negativity(psi);
    rep["wigner_grid"] = {{"half_extent", wgrid.half_extent}, {"points", wgrid.points}};
    rep["chi_grid"] = {{"half_extent", cgrid.half_extent}, {"points", cgrid.points}};
    rep["provenance"] = provenance(ctx);
    write_json(ctx.out / "report.json", rep);
    std::cout << "state " << to_record(spec) << " dim=" << psi.dim()
              << " wln=" << format_double(rep["wigner_log_negativity"].get<double>()) << " -> " << ctx.out.string()
              << "\n";
    return kOk;
}

int cmd_wigner(const Context &ctx) {
    const Config &c = ctx.config;
    c.check_keys(with_common({"grid.half_extent", "grid.points", "export.binary", "radial.radii", "radial.points"}),
                 {"state"});
    const StateSpec spec = c.spec("state");
    const FockVector psi = build(c, spec);
    const PolarExpansion wexp(psi, PolarExpansion::Kind::Wigner);
    const auto fixed = grid_from(c);
    const PhaseGrid grid = fixed ? *fixed : negativity_grid(wexp);
    const WignerFn w = wigner_fn(wexp, grid);

    fs::create_directories(ctx.out);
    write_text(ctx.out / "wigner.csv", csv_preamble(ctx) + to_csv(w));
    if (c.boolean("export.binary", false)) write_grid_binary(ctx.out / "wigner.bin", w);

    // W along circles of fixed radius
    const std::vector<double> radii = c.numbers("radial.radii");
    if (!radii.empty()) {
        const long long m = c.integer("radial.points", 720);
        if (m < 1) throw InvalidSpec("radial.points must be positive");
        std::string cut = csv_preamble(ctx) + "radius,theta,value\n";
        for (double r : radii) {
            if (!(r >= 0.0)) throw InvalidSpec("radial.radii must be nonnegative");
            for (long long k = 0; k < m; ++k) {
                const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
                cut += format_double(r) + "," + format_double(th) + "," +
                       format_double(wexp(r * std::cos(th), r * std::sin(th)).real()) + "\n";
            }
        }
        write_text(ctx.out / "radial_cut.csv", cut);
    }
    Json rep = state_summary(spec, psi);
    rep["integral"] = integrate(w);
    rep["wigner_log_negativity"] = wigner_log_negativity(w);
    rep["grid"] = {{"half_extent", grid.half_extent}, {"points", grid.points}};
    rep["provenance"] = provenance(ctx);
    write_json(ctx.out / "report.json", rep);
    std::cout << "wigner " << to_record(spec) << " -> " << ctx.out.string() << "\n";
    return kOk;
}

GaussianChannel channel_from(const Config &c) {
    static const char *keys[] = {"x00", "x01", "x10", "x11", "y00", "y01", "y11", "l0", "l1"};
    const bool flat = std::any_of(std::begin(keys), std::end(keys), [&](const char *k) {
        return c.has(std::string("channel.") + k);
    });
    if (c.has("channel.family")) {
        if (flat) throw InvalidSpec("give either channel.family/params or the flat channel entries, not both");
        const ChannelFamily f = parse_family(c.string("channel.family", ""));
        return decode(f, c.numbers("channel.params"));
    }
    if (c.has("channel.params")) throw InvalidSpec("channel.params needs channel.family");
    GaussianChannel id;
    const std::vector<double> def = to_flat(id);
    std::vector<double> v(9);
    for (int i = 0; i < 9; ++i) v[i] = c.number(std::string("channel.") + keys[i], def[i]);
    return from_flat(v);
}

int cmd_fidelity(const Context &ctx) {
    const Config &c = ctx.config;
    c.check_keys(with_common({"grid.half_extent", "grid.points", "channel.family", "channel.params", "channel.x00",
                              "channel.x01", "channel.x10", "channel.x11", "channel.y00", "channel.y01",
                              "channel.y11", "channel.l0", "channel.l1"}),
                 {"input", "target"});
    const StateSpec in = c.spec("input"), tgt = c.spec("target");
    const GaussianChannel ch = channel_from(c);
    const FockVector u = build(c, in), v = build(c, tgt);
    const FidelityEvaluator ev(u, v);
    const auto grid = grid_from(c);

    Json rep = Json::object();
    rep["input"] = state_summary(in, u);
    rep["target"] = state_summary(tgt, v);
    rep["channel"] = channel_to_json(ch);
    rep["fidelity"] = grid ? ev.on_grid(ch, *grid) : ev(ch);
    rep["fidelity_identity"] = grid ? ev.on_grid(GaussianChannel{}, *grid) : ev(GaussianChannel{});
    if (grid) rep["grid"] = {{"mode", "fixed"}, {"half_extent", grid->half_extent}, {"points", grid->points}};
    else rep["grid"] = {{"mode", "adaptive"}, {"nodes", ev.lattice_nodes(ch)}};
    rep["kappa"] = calibration().kappa;
    rep["provenance"] = provenance(ctx);
    fs::create_directories(ctx.out);
    write_json(ctx.out / "fidelity.json", rep);
    std::cout << "fidelity " << format_double(rep["fidelity"].get<double>()) << " (identity "
              << format_double(rep["fidelity_identity"].get<double>()) << ")\n";
    return kOk;
}

std::set<std::string> optimizer_keys() {
    std::set<std::string> s = with_common({"family", "grid.half_extent", "grid.points"});
    s.insert(kPsoKeys.begin(), kPsoKeys.end());
    return s;
}

int cmd_convert(const Context &ctx) {
    const Config &c = ctx.config;
    c.check_keys(optimizer_keys(), {"input", "target"});
    if (c.has("dim")) throw InvalidSpec("convert picks truncations automatically; remove 'dim'");
    const StateSpec in = c.spec("input"), tgt = c.spec("target");
    const ChannelFamily fam = parse_family(c.string("family", "full_cptp"));
    const PsoConfig pso = pso_from(c);
    const ConversionResult r = optimize_conversion(in, tgt, fam, pso, grid_from(c));
    Json j = result_to_json(r);
    j["provenance"] = provenance(ctx);
    fs::create_directories(ctx.out);
    write_json(ctx.out / "result.json", j);
    write_text(ctx.out / "result.csv", csv_preamble(ctx) + result_csv_header() + "\n" + result_csv_row(r) + "\n");
    std::cout << "convert " << to_record(in) << " -> " << to_record(tgt) << ": init "
              << format_double(r.fidelity_init) << " best " << format_double(r.fidelity_best) << "\n";
    return kOk;
}

int cmd_sweep(const Context &ctx) {
    const Config &c = ctx.config;
    std::set<std::string> keys = optimizer_keys();
    c.check_keys(keys, {"inputs", "targets"});
    if (c.has("dim")) throw InvalidSpec("sweep picks truncations automatically; remove 'dim'");
    const std::vector<StateSpec> inputs = c.spec_list("inputs");
    const std::vector<StateSpec> targets = c.spec_list("targets");
    const ChannelFamily fam = parse_family(c.string("family", "full_cptp"));
    const PsoConfig pso = pso_from(c);
    const auto grid = grid_from(c);

    const fs::path cells = ctx.out / "cells";
    fs::create_directories(cells);
    const fs::path manifest = ctx.out / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream is(manifest);
        Json m;
        try {
            m = Json::parse(is);
        } catch (const nlohmann::json::exception &e) {
            throw InvalidSpec("unreadable manifest in " + ctx.out.string());
        }
        if (m.value("/provenance/config_hash"_json_pointer, std::string()) != ctx.hash) {
            throw InvalidSpec("output directory " + ctx.out.string() + " belongs to a different config");
        }
    }
    Json man = Json::object();
    man["inputs"] = Json::array();
    for (const auto &s : inputs) man["inputs"].push_back(to_record(s));
    man["targets"] = Json::array();
    for (const auto &s : targets) man["targets"].push_back(to_record(s));
    man["provenance"] = provenance(ctx);
    write_json(manifest, man);

    auto cell_path = [&](int i, int j) { return cells / (std::to_string(i) + "_" + std::to_string(j) + ".json"); };
    // resume: cells already on disk are loaded instead of recomputed
    std::map<std::pair<int, int>, ConversionResult> done;
    for (int i = 0; i < static_cast<int>(inputs.size()); ++i) {
        for (int j = 0; j < static_cast<int>(targets.size()); ++j) {
            const fs::path p = cell_path(i, j);
            if (!fs::exists(p)) continue;
            std::ifstream is(p);
            try {
                done.emplace(std::make_pair(i, j), result_from_json(Json::parse(is)));
            } catch (const std::exception &) {
                // unreadable partial cell: recompute
            }
        }
    }
    const std::size_t resumed = done.size();
    sweep(inputs, targets, fam, pso, grid,
          [&](int i, int j, const ConversionResult &r) {
              Json jr = result_to_json(r);
              jr["cell"] = {i, j};
              jr["provenance"] = provenance(ctx);
              write_json(cell_path(i, j), jr);
              done.emplace(std::make_pair(i, j), r);
              std::cout << "cell " << i << "," << j << ": "
                        << (r.ok() ? "best " + format_double(r.fidelity_best) : "error: " + r.error) << "\n"
                        << std::flush;
          },
          [&](int i, int j) { return done.count({i, j}) != 0; });

    std::string csv = csv_preamble(ctx) + "input_index,target_index," + result_csv_header() + "\n";
    int failed = 0;
    for (const auto &[ij, r] : done) {
        csv += std::to_string(ij.first) + "," + std::to_string(ij.second) + "," + result_csv_row(r) + "\n";
        failed += !r.ok();
    }
    write_text(ctx.out / "summary.csv", csv);
    std::cout << "sweep: " << done.size() << " cells (" << resumed << " resumed, " << failed << " failed) -> "
              << ctx.out.string() << "\n";
    return kOk;
}

int cmd_negativity_match(const Context &ctx) {
    const Config &c = ctx.config;
    c.check_keys(with_common({"c", "xi", "xi_db", "t_lo", "t_hi"}), {});
    const std::vector<double> cs = c.numbers("c");
    if (c.has("xi") && c.has("xi_db")) throw InvalidSpec("give either xi or xi_db, not both");
    std::vector<double> xis = c.numbers("xi");
    for (double db : c.numbers("xi_db")) xis.push_back(db_to_xi(db));
    const double lo = c.number("t_lo", 0.005), hi = c.number("t_hi", 0.3);
    const int dim = static_cast<int>(c.integer("dim", kDefaultDim));

    std::string csv = csv_preamble(ctx) + "xi,c,t,error\n";
    Json rows = Json::array();
    for (double xi : xis) {
        for (double cc : cs) {
            Json row = {{"xi", xi}, {"c", cc}};
            std::string t, err;
            try {
                const double v = match_triplicity(cc, xi, lo, hi, dim);
                row["t"] = v;
                t = format_double(v);
            } catch (const Error &e) {
                row["error"] = e.what();
                err = e.what();
            }
            std::string q = err;
            if (q.find_first_of(",\"") != std::string::npos) {
                std::string s = "\"";
                for (char ch : q) s += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
                q = s + "\"";
            }
            csv += format_double(xi) + "," + format_double(cc) + "," + t + "," + q + "\n";
            rows.push_back(row);
            std::cout << "xi=" << format_double(xi) << " c=" << format_double(cc) << " t=" << (t.empty() ? err : t)
                      << "\n";
        }
    }
    fs::create_directories(ctx.out);
    write_text(ctx.out / "table.csv", csv);
    write_json(ctx.out / "table.json", {{"rows", rows}, {"provenance", provenance(ctx)}});
    return kOk;
}

// ---------------------------------------------------------------------------

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::string state, input, target, family;
    std::vector<std::string> inputs, targets;
    std::vector<double> c, xi;
    std::int64_t seed = -1;
    int dim = 0, threads = -1;
};

Json merged_config(const Options &o) {
    Json flat = Json::object();
    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is) throw InvalidSpec("cannot read config file " + o.config_path);
        Json file;
        try {
            file = Json::parse(is, nullptr, true, true);
        } catch (const nlohmann::json::exception &e) {
            throw InvalidSpec("config file " + o.config_path + " is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw InvalidSpec("config file must hold a JSON object");
        flatten_into(file, "", flat);
    }
    // flags win over the file
    auto replace_prefix = [&](const std::string &key, const Json &value) {
        for (auto it = flat.begin(); it != flat.end();) {
            if (it.key() == key || it.key().rfind(key + ".", 0) == 0) it = flat.erase(it);
            else ++it;
        }
        flat[key] = value;
    };
    if (!o.state.empty()) replace_prefix("state", o.state);
    if (!o.input.empty()) replace_prefix("input", o.input);
    if (!o.target.empty()) replace_prefix("target", o.target);
    if (!o.inputs.empty()) replace_prefix("inputs", o.inputs);
    if (!o.targets.empty()) replace_prefix("targets", o.targets);
    if (!o.family.empty()) flat["family"] = o.family;
    if (!o.out.empty()) flat["output"] = o.out;
    if (o.seed >= 0) flat["seed"] = static_cast<std::uint64_t>(o.seed);
    if (o.dim > 0) flat["dim"] = o.dim;
    if (o.threads >= 0) flat["threads"] = o.threads;
    if (!o.c.empty()) flat["c"] = o.c;
    if (!o.xi.empty()) flat["xi"] = o.xi;
    for (const auto &s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidSpec("--set expects key=value, got '" + s + "'");
        Json v = parse_value(s.substr(eq + 1));
        Json tmp = Json::object();
        flatten_into(v, s.substr(0, eq), tmp);
        for (auto it = tmp.begin(); it != tmp.end(); ++it) flat[it.key()] = it.value();
    }
    return flat;
}

fs::path output_dir(const std::string &command, const Config &c, const std::string &hash) {
    if (c.has("output")) return fs::path(c.string("output", ""));
    const char *root = std::getenv("CVCONV_OUTPUT_ROOT");
    const fs::path base = (root && *root) ? fs::path(root) : fs::path("cvconv-out");
    return base / (command + "-" + hash.substr(0, 8));
}

int run(const std::string &command, const Options &o) {
    const Json flat = merged_config(o);
    Config cfg(command, flat);
    // ordered_json keeps insertion order; hash a key-sorted dump
    const nlohmann::json sorted = nlohmann::json::parse(result_config(flat).dump());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(command + sorted.dump())));
    Context ctx{command, cfg, hex, {}};
    ctx.out = output_dir(command, cfg, ctx.hash);
    if (command == "state") return cmd_state(ctx);
    if (command == "wigner") return cmd_wigner(ctx);
    if (command == "fidelity") return cmd_fidelity(ctx);
    if (command == "convert") return cmd_convert(ctx);
    if (command == "sweep") return cmd_sweep(ctx);
    if (command == "negativity-match") return cmd_negativity_match(ctx);
    throw InvalidSpec("unknown command " + command);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Gaussian conversion of non-Gaussian bosonic states"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", o.config_path, "JSON config file (flat dotted keys)");
        sub->add_option("--set", o.sets, "Override a config key: key=value (value parsed as JSON)");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Random seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", o.threads, "Worker thread cap (0 = all cores)")->check(CLI::NonNegativeNumber);
    };
    auto *state = app.add_subcommand("state", "Build a state and export amplitudes, W, chi and a report");
    auto *wigner = app.add_subcommand("wigner", "Wigner grid and radial cuts of a state");
    auto *fid = app.add_subcommand("fidelity", "Fidelity after a given Gaussian channel");
    auto *conv = app.add_subcommand("convert", "Optimize a Gaussian conversion between two states");
    auto *sw = app.add_subcommand("sweep", "Conversions over a grid of inputs and targets");
    auto *neg = app.add_subcommand("negativity-match", "Triplicities matching cubic-phase Wigner negativity");
    for (auto *s : {state, wigner, fid, conv, sw, neg}) common(s);
    for (auto *s : {state, wigner}) {
        s->add_option("--state", o.state, "State record, e.g. family=cat;N=2;alpha=2");
        s->add_option("--dim", o.dim, "Fock truncation")->check(CLI::PositiveNumber);
    }
    for (auto *s : {fid, conv}) {
        s->add_option("--input", o.input, "Input state record");
        s->add_option("--target", o.target, "Target state record");
    }
    fid->add_option("--dim", o.dim, "Fock truncation")->check(CLI::PositiveNumber);
    neg->add_option("--dim", o.dim, "Fock truncation")->check(CLI::PositiveNumber);
    for (auto *s : {conv, sw}) s->add_option("--family", o.family, "full_cptp | symplectic_displacement | squeeze_only");
    sw->add_option("--inputs", o.inputs, "Input state records");
    sw->add_option("--targets", o.targets, "Target state records");
    neg->add_option("--c", o.c, "Cubicities");
    neg->add_option("--xi", o.xi, "Squeezing values of the cubic-phase state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const ConventionError &e) {
        std::cerr << "convention error: " << e.what() << "\n";
        return kConvention;
    } catch (const TruncationError &e) {
        std::cerr << "truncation error: " << e.what() << "\n";
        return kTruncation;
    } catch (const InvalidSpec &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidDimension &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DimensionMismatch &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const RejectedChannel &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const BracketError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
