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

#include <string>
#include <variant>
#include <vector>

#include "cvconv/fock.hpp"

namespace cvconv {

/// D(alpha) S(r e^{-2i phi}) |0>.
struct SqueezedCoherent {
    cplx alpha{0.0};
    double r = 0.0;
    double phi = 0.0;
};

/// Rotation-symmetric code word with a squeezed-coherent primitive.
struct CatCode {
    int N = 1;
    cplx alpha{2.0};
    int mu = 0;
    double r = 0.0;
    double phi = 0.0;
};

struct BinomialCode {
    int N = 2;
    int K = 2;
    int mu = 0;
};

/// a^{|L|} (L < 0) or a^dag^{|L|} (L > 0) applied to D(alpha) S(xi e^{-2i phi}) |0>.
struct Pass {
    int L = -2;
    cplx alpha{0.0};
    cplx xi{0.0};
    double phi = 0.0;
};

/// exp(i c q^3) S(xi) |0>.
struct CubicPhase {
    double c = 0.0;
    double xi = 0.0;
};

/// exp(i (t* a^3 + t a^dag^3)) |0>.
struct Trisqueezed {
    cplx t{0.0};
};

/// Finite-energy square-lattice GKP word. n_max = 0 selects the default range.
struct Gkp {
    double delta = 0.5;
    int mu = 0;
    int n_max = 0;
};

struct FockBasis {
    int n = 0;
};

using StateSpec =
    std::variant<SqueezedCoherent, CatCode, BinomialCode, Pass, CubicPhase, Trisqueezed, Gkp, FockBasis>;

inline constexpr int kDefaultDim = 120;
inline constexpr double kTailTolerance = 1e-8;

/// Dimensions tried in order by build_state_auto.
const std::vector<int> &escalation_dims();

/// Throws InvalidSpec for out-of-range parameters.
void validate(const StateSpec &spec);

/// Normalized state at truncation `dim`. Throws TruncationError when the
/// top-5-level tail mass exceeds `tail_tol`. Trisqueezed states are exempt:
/// they are defined by exp(i(t* a^3 + t a^dag^3)) truncated at `dim` plus guard.
FockVector build_state(const StateSpec &spec, int dim = kDefaultDim, double tail_tol = kTailTolerance);

/// Builds at the smallest escalation dimension >= `min_dim` that passes the tail check.
FockVector build_state_auto(const StateSpec &spec, int min_dim = kDefaultDim, double tail_tol = kTailTolerance);

/// Canonical family name ("cat", "binomial", ...).
std::string family_name(const StateSpec &spec);

/// Largest |alpha| displacement of the primitive, used to size phase-space grids.
double displacement_scale(const StateSpec &spec);

/// D(beta) v with analytic matrix elements; output truncated at `out_dim`.
FockVector displace(const FockVector &v, cplx beta, int out_dim);

/// S(zeta)|0> from the closed-form amplitudes.
FockVector squeezed_vacuum(cplx zeta, int dim);

/// diag e^{i (pi/N) n}.
FockOperator logical_z_op(int N, int dim);

/// Cat amplitude at which <n> of the cat word equals that of the binomial word
/// with the same N and mu. Bisection to 1e-6; throws BracketError without a sign change.
double isoenergetic_alpha(int N, int K, int mu, double lo, double hi);

/// "family=cat;N=2;alpha=2;mu=0" style record.
std::string to_record(const StateSpec &spec);
StateSpec parse_record(const std::string &text);

}  // namespace cvconv
