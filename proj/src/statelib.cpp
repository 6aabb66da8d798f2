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

#include "cvconv/statelib.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cvconv/errors.hpp"

namespace cvconv {

namespace {

constexpr int kPrimitiveExtra = 40;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_mu(int mu) {
    if (mu != 0 && mu != 1) throw InvalidSpec("mu must be 0 or 1, got " + std::to_string(mu));
}

void check_finite(double v, const char *name) {
    if (!std::isfinite(v)) throw InvalidSpec(std::string(name) + " must be finite");
}

void check_finite(cplx v, const char *name) {
    check_finite(v.real(), name);
    check_finite(v.imag(), name);
}

FockVector checked(const FockVector &raw, double tail_tol, const std::string &what) {
    FockVector v = raw.normalized();
    double tail = v.tail_mass(5);
    if (tail > tail_tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: tail mass %.3g on the top 5 of %d levels exceeds %.3g", what.c_str(), tail,
                      v.dim(), tail_tol);
        throw TruncationError(buf);
    }
    return v;
}

// D(alpha) S(zeta)|0> at `dim`; the squeezed vacuum is built with extra levels
// and its lost mass is checked, since the closed form is exact.
FockVector squeezed_coherent(cplx alpha, cplx zeta, int dim, double tail_tol) {
    const int work = dim + kPrimitiveExtra;
    FockVector sv = squeezed_vacuum(zeta, work);
    double lost = 1.0 - sv.amps().squaredNorm();
    if (lost > tail_tol) {
        throw TruncationError("squeezed primitive does not fit in " + std::to_string(work) + " levels");
    }
    return displace(sv, alpha, dim);
}

int default_gkp_nmax(double delta) {
    return static_cast<int>(std::ceil(4.0 / (std::sqrt(std::numbers::pi) * delta))) + 3;
}

FockVector build_raw(const StateSpec &spec, int dim, double tail_tol) {
    return std::visit(
        overloaded{
            [&](const SqueezedCoherent &s) {
                return squeezed_coherent(s.alpha, std::polar(s.r, -2.0 * s.phi), dim, tail_tol);
            },
            [&](const CatCode &s) {
                FockVector prim = squeezed_coherent(s.alpha, std::polar(s.r, -2.0 * s.phi), dim, tail_tol);
                // sum_m (-1)^{mu m} e^{i m pi n / N} keeps n = mu N (mod 2N) only
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
                const int period = 2 * s.N;
                for (int n = s.mu * s.N; n < dim; n += period) out[n] = prim[n];
                return FockVector(std::move(out));
            },
            [&](const BinomialCode &s) {
                if (s.K * s.N >= dim) throw TruncationError("binomial word exceeds truncation");
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
                for (int k = s.mu; k <= s.K; k += 2) {
                    double lc = std::lgamma(s.K + 1.0) - std::lgamma(k + 1.0) - std::lgamma(s.K - k + 1.0);
                    out[k * s.N] = std::exp(0.5 * lc);
                }
                return FockVector(std::move(out));
            },
            [&](const Pass &s) {
                const int k = std::abs(s.L);
                const int work = dim + k;
                FockVector prim = squeezed_coherent(s.alpha, s.xi * std::polar(1.0, -2.0 * s.phi), work, tail_tol);
                Eigen::VectorXcd v = prim.amps();
                for (int step = 0; step < k; ++step) {
                    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(work);
                    if (s.L < 0) {
                        for (int n = 0; n + 1 < work; ++n) next[n] = std::sqrt(n + 1.0) * v[n + 1];
                    } else {
                        for (int n = 1; n < work; ++n) next[n] = std::sqrt(static_cast<double>(n)) * v[n - 1];
                    }
                    v.swap(next);
                }
                return FockVector(v.head(dim));
            },
            [&](const CubicPhase &s) {
                // exp(i c q^3) of a truncated q converges slowly in the working dimension.
                const int work = 2 * dim;
                FockVector sv = squeezed_vacuum(s.xi, work);
                FockVector out = cubic_phase_op(s.c, work) * sv;
                return out.resized(dim);
            },
            [&](const Trisqueezed &s) { return trisqueeze_op(s.t, dim) * FockVector::vacuum(dim); },
            [&](const Gkp &s) {
                const int nmax = s.n_max > 0 ? s.n_max : default_gkp_nmax(s.delta);
                const int work = dim + kPrimitiveExtra;
                FockVector sv = squeezed_vacuum(-std::log(s.delta), work);
                if (1.0 - sv.amps().squaredNorm() > tail_tol) {
                    throw TruncationError("GKP squeezed primitive does not fit in " + std::to_string(work) + " levels");
                }
                const double pi = std::numbers::pi;
                Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
                for (int n = -nmax; n <= nmax; ++n) {
                    const double m = 2.0 * n + s.mu;
                    const double w = std::exp(-0.5 * pi * s.delta * s.delta * m * m);
                    if (w < 1e-12) continue;
                    out += w * displace(sv, std::sqrt(pi / 2.0) * m, dim).amps();
                }
                return FockVector(std::move(out));
            },
            [&](const FockBasis &s) {
                if (s.n >= dim) throw TruncationError("Fock level exceeds truncation");
                return FockVector::basis(dim, s.n);
            },
        },
        spec);
}

// --- text record -----------------------------------------------------------

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class Fields {
  public:
    explicit Fields(const std::string &text) {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ';')) {
            auto first = item.find_first_not_of(" \t");
            if (first == std::string::npos) continue;
            auto last = item.find_last_not_of(" \t");
            item = item.substr(first, last - first + 1);
            auto eq = item.find('=');
            if (eq == std::string::npos) throw InvalidSpec("state record entry without '=': " + item);
            std::string key = item.substr(0, eq);
            std::string val = item.substr(eq + 1);
            if (!kv_.emplace(key, val).second) throw InvalidSpec("duplicate key in state record: " + key);
        }
    }

    bool has(const std::string &key) const { return kv_.count(key) != 0; }

    std::string text(const std::string &key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw InvalidSpec("state record is missing '" + key + "'");
        used_.insert(key);
        return it->second;
    }

    double number(const std::string &key, double fallback) {
        if (!has(key)) return fallback;
        std::string s = text(key);
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw InvalidSpec("state record value for '" + key + "' is not a number: " + s);
        }
        return v;
    }

    int integer(const std::string &key, int fallback) {
        double v = number(key, fallback);
        if (v != std::floor(v)) throw InvalidSpec("state record value for '" + key + "' must be an integer");
        return static_cast<int>(v);
    }

    void finish() const {
        for (const auto &[k, v] : kv_) {
            if (!used_.count(k)) throw InvalidSpec("unknown key in state record: " + k);
        }
    }

  private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

}  // namespace

const std::vector<int> &escalation_dims() {
    static const std::vector<int> dims{120, 160, 200, 240, 320, 400};
    return dims;
}

void validate(const StateSpec &spec) {
    std::visit(overloaded{
                   [](const SqueezedCoherent &s) {
                       check_finite(s.alpha, "alpha");
                       check_finite(s.r, "r");
                       check_finite(s.phi, "phi");
                   },
                   [](const CatCode &s) {
                       if (s.N < 1) throw InvalidSpec("cat code needs N >= 1");
                       check_mu(s.mu);
                       check_finite(s.alpha, "alpha");
                       if (s.alpha == cplx(0.0)) throw InvalidSpec("cat code needs alpha != 0");
                       check_finite(s.r, "r");
                       check_finite(s.phi, "phi");
                   },
                   [](const BinomialCode &s) {
                       if (s.N < 1 || s.K < 1) throw InvalidSpec("binomial code needs N >= 1 and K >= 1");
                       check_mu(s.mu);
                   },
                   [](const Pass &s) {
                       if (s.L == 0 || s.L < -5 || s.L > 5) throw InvalidSpec("PASS needs L in [-5,5] \\ {0}");
                       check_finite(s.alpha, "alpha");
                       check_finite(s.xi, "xi");
                       check_finite(s.phi, "phi");
                   },
                   [](const CubicPhase &s) {
                       check_finite(s.c, "c");
                       check_finite(s.xi, "xi");
                   },
                   [](const Trisqueezed &s) { check_finite(s.t, "t"); },
                   [](const Gkp &s) {
                       if (!(s.delta > 0.0) || !std::isfinite(s.delta)) throw InvalidSpec("GKP needs delta > 0");
                       check_mu(s.mu);
                       if (s.n_max < 0) throw InvalidSpec("GKP n_max must be >= 0");
                   },
                   [](const FockBasis &s) {
                       if (s.n < 0) throw InvalidSpec("Fock level must be >= 0");
                   },
               },
               spec);
}

FockVector build_state(const StateSpec &spec, int dim, double tail_tol) {
    validate(spec);
    if (dim < 2) throw InvalidDimension("build_state: dimension must be at least 2");
    FockVector raw = build_raw(spec, dim, tail_tol);
    // The trisqueezed amplitudes keep a power-law tail at every truncation, so
    // the state is defined by its truncated exponential and not tail-checked.
    if (std::holds_alternative<Trisqueezed>(spec)) return raw.normalized();
    return checked(raw, tail_tol, family_name(spec));
}

FockVector build_state_auto(const StateSpec &spec, int min_dim, double tail_tol) {
    validate(spec);
    std::string last;
    for (int d : escalation_dims()) {
        if (d < min_dim) continue;
        try {
            return build_state(spec, d, tail_tol);
        } catch (const TruncationError &e) {
            last = e.what();
        }
    }
    if (last.empty()) return build_state(spec, min_dim, tail_tol);
    throw TruncationError(last + " (largest escalation dimension reached)");
}

std::string family_name(const StateSpec &spec) {
    return std::visit(overloaded{
                          [](const SqueezedCoherent &) { return "squeezed"; },
                          [](const CatCode &) { return "cat"; },
                          [](const BinomialCode &) { return "binomial"; },
                          [](const Pass &) { return "pass"; },
                          [](const CubicPhase &) { return "cubic"; },
                          [](const Trisqueezed &) { return "trisqueezed"; },
                          [](const Gkp &) { return "gkp"; },
                          [](const FockBasis &) { return "fock"; },
                      },
                      spec);
}

double displacement_scale(const StateSpec &spec) {
    return std::visit(overloaded{
                          [](const SqueezedCoherent &s) { return std::abs(s.alpha); },
                          [](const CatCode &s) { return std::abs(s.alpha); },
                          [](const Pass &s) { return std::abs(s.alpha); },
                          [](const auto &) { return 0.0; },
                      },
                      spec);
}

FockVector displace(const FockVector &v, cplx beta, int out_dim) {
    if (beta == cplx(0.0)) return v.resized(out_dim);
    const int cols = v.support();
    Eigen::MatrixXd d = displacement_elements(std::abs(beta), out_dim, cols);
    const double theta = std::arg(beta);
    Eigen::VectorXcd out(out_dim);
    for (int m = 0; m < out_dim; ++m) {
        cplx acc = 0.0;
        for (int n = 0; n < cols; ++n) acc += d(m, n) * std::polar(1.0, theta * (m - n)) * v[n];
        out[m] = acc;
    }
    return FockVector(std::move(out));
}

FockVector squeezed_vacuum(cplx zeta, int dim) {
    if (dim < 1) throw InvalidDimension("squeezed_vacuum: dimension must be positive");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
    const double r = std::abs(zeta);
    if (r == 0.0) {
        out[0] = 1.0;
        return FockVector(std::move(out));
    }
    // c_{2k} = (-e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k! sqrt(cosh r))
    const double lt = std::log(std::tanh(r));
    const double lc = -0.5 * std::log(std::cosh(r));
    const cplx phase = -std::polar(1.0, std::arg(zeta));
    cplx ph = 1.0;
    for (int k = 0; 2 * k < dim; ++k) {
        double lm = lc + k * lt + 0.5 * std::lgamma(2.0 * k + 1.0) - k * std::numbers::ln2 - std::lgamma(k + 1.0);
        out[2 * k] = std::exp(lm) * ph;
        ph *= phase;
    }
    return FockVector(std::move(out));
}

FockOperator logical_z_op(int N, int dim) {
    if (N < 1) throw InvalidSpec("logical_z_op needs N >= 1");
    return phase_rotation_op(-std::numbers::pi / N, dim);
}

double isoenergetic_alpha(int N, int K, int mu, double lo, double hi) {
    if (!(hi > lo)) throw BracketError("isoenergetic_alpha: empty bracket");
    const double target = mean_photon_number(build_state_auto(BinomialCode{N, K, mu}));
    auto f = [&](double a) {
        return mean_photon_number(build_state_auto(CatCode{N, a, mu, 0.0, 0.0})) - target;
    };
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) throw BracketError("isoenergetic_alpha: no sign change on bracket");
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::string to_record(const StateSpec &spec) {
    std::string fam = "family=" + family_name(spec);
    return std::visit(
        overloaded{
            [&](const SqueezedCoherent &s) {
                return fam + ";alpha=" + fmt(s.alpha.real()) + ";alpha_im=" + fmt(s.alpha.imag()) + ";r=" + fmt(s.r) +
                       ";phi=" + fmt(s.phi);
            },
            [&](const CatCode &s) {
                return fam + ";N=" + std::to_string(s.N) + ";alpha=" + fmt(s.alpha.real()) +
                       ";alpha_im=" + fmt(s.alpha.imag()) + ";mu=" + std::to_string(s.mu) + ";r=" + fmt(s.r) +
                       ";phi=" + fmt(s.phi);
            },
            [&](const BinomialCode &s) {
                return fam + ";N=" + std::to_string(s.N) + ";K=" + std::to_string(s.K) + ";mu=" + std::to_string(s.mu);
            },
            [&](const Pass &s) {
                return fam + ";L=" + std::to_string(s.L) + ";alpha=" + fmt(s.alpha.real()) +
                       ";alpha_im=" + fmt(s.alpha.imag()) + ";xi=" + fmt(s.xi.real()) + ";xi_im=" + fmt(s.xi.imag()) +
                       ";phi=" + fmt(s.phi);
            },
            [&](const CubicPhase &s) { return fam + ";c=" + fmt(s.c) + ";xi=" + fmt(s.xi); },
            [&](const Trisqueezed &s) { return fam + ";t=" + fmt(s.t.real()) + ";t_im=" + fmt(s.t.imag()); },
            [&](const Gkp &s) {
                return fam + ";delta=" + fmt(s.delta) + ";mu=" + std::to_string(s.mu) +
                       ";n_max=" + std::to_string(s.n_max);
            },
            [&](const FockBasis &s) { return fam + ";n=" + std::to_string(s.n); },
        },
        spec);
}

StateSpec parse_record(const std::string &text) {
    Fields f(text);
    const std::string fam = f.text("family");
    auto xi_of = [&](const char *key, const char *db_key) {
        if (f.has(key) && f.has(db_key)) {
            throw InvalidSpec(std::string("give either ") + key + " or " + db_key + ", not both");
        }
        return f.has(db_key) ? db_to_xi(f.number(db_key, 0.0)) : f.number(key, 0.0);
    };
    StateSpec spec;
    if (fam == "squeezed") {
        SqueezedCoherent s;
        s.alpha = {f.number("alpha", 0.0), f.number("alpha_im", 0.0)};
        s.r = xi_of("r", "r_db");
        s.phi = f.number("phi", 0.0);
        spec = s;
    } else if (fam == "cat") {
        CatCode s;
        s.N = f.integer("N", 1);
        s.alpha = {f.number("alpha", 2.0), f.number("alpha_im", 0.0)};
        s.mu = f.integer("mu", 0);
        s.r = f.number("r", 0.0);
        s.phi = f.number("phi", 0.0);
        spec = s;
    } else if (fam == "binomial") {
        BinomialCode s;
        s.N = f.integer("N", 2);
        s.K = f.integer("K", 2);
        s.mu = f.integer("mu", 0);
        spec = s;
    } else if (fam == "pass") {
        Pass s;
        s.L = f.integer("L", -2);
        s.alpha = {f.number("alpha", 0.0), f.number("alpha_im", 0.0)};
        s.xi = {xi_of("xi", "xi_db"), f.number("xi_im", 0.0)};
        s.phi = f.number("phi", 0.0);
        spec = s;
    } else if (fam == "cubic") {
        CubicPhase s;
        s.c = f.number("c", 0.0);
        s.xi = xi_of("xi", "xi_db");
        spec = s;
    } else if (fam == "trisqueezed") {
        Trisqueezed s;
        s.t = {f.number("t", 0.0), f.number("t_im", 0.0)};
        spec = s;
    } else if (fam == "gkp") {
        Gkp s;
        if (f.has("delta") && f.has("db")) throw InvalidSpec("give either delta or db, not both");
        s.delta = f.has("db") ? std::pow(10.0, -f.number("db", 0.0) / 20.0) : f.number("delta", 0.5);
        s.mu = f.integer("mu", 0);
        s.n_max = f.integer("n_max", 0);
        spec = s;
    } else if (fam == "fock") {
        spec = FockBasis{f.integer("n", 0)};
    } else {
        throw InvalidSpec("unknown state family: " + fam);
    }
    f.finish();
    validate(spec);
    return spec;
}

}  // namespace cvconv
