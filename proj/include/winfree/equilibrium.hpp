#pragma once

#include <stdexcept>

#include "winfree/certificates.hpp"
#include "winfree/model.hpp"

namespace winfree {

/// g(s) = sin(s) (1 + cos(s)): the pinning strength a single oscillator at
/// phase s can balance. Unimodal on [0, pi]: increasing up to pi/3, then
/// decreasing; g(pi/3) = 3 sqrt(3) / 4.
double equilibrium_response(double s);

/// Matched pair g(alpha_inf) = g(alpha) with alpha_inf in (0, pi/3) for a
/// basin half-width alpha in (pi/3, pi).
struct AlphaPair {
    double alpha = 0.0;
    double alpha_inf = 0.0;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root of g on the rising branch matching the level g(alpha); bisection to
/// |g(alpha_inf) - g(alpha)| <= 1e-12. Requires alpha in (pi/3, pi)
/// (throws std::domain_error otherwise).
AlphaPair alpha_infinity(double alpha);

/// Strict existence condition max|nu_i| / kappa < g(alpha) for a fixed point
/// inside [-alpha, alpha]^N; when it holds the fixed point is unique there and
/// lies in (-alpha_inf, alpha_inf)^N.
CertificateReport equilibrium_exists(const ModelParameters& params, double alpha);

/// First-order entrance time bound pi / (kappa g(alpha) - max|nu_i|); throws
/// std::domain_error when the denominator is not positive.
double entrance_time_bound(const ModelParameters& params, double alpha);

/// Fixed point of theta_i = asin(nu_i / (kappa R)), R = (1/N) sum (1 + cos theta_i),
/// found by the damped scalar iteration on R started from R = 2. Converges to
/// the configuration inside (-alpha_inf, alpha_inf)^N; residual
/// max|F_i(Theta)| <= 1e-10 on success, SolverError otherwise.
EnsembleState find_equilibrium(const ModelParameters& params, double alpha);

/// Local contraction rate kappa (2 cos(alpha_inf) - 1) (cos(alpha_inf) + 1) of
/// the first-order flow inside the entered box.
double exponential_rate(const AlphaPair& pair, double kappa);

/// Concrete budget constants for the inertial partial-death route at a given
/// initial phase spread and activity deficit epsilon.
struct Theorem2Parameters {
    double alpha = 0.0;
    AlphaPair pair;
    SmallnessConstants constants;
    double entrance_time = 0.0;  // 2 pi / (kappa g(alpha)), >= m for any admissible m
};

/// Picks alpha with theta0_sup < alpha < pi and cos(2 alpha_inf) > 1 - epsilon/2,
/// then shrinks (a, b, c) geometrically from (g(alpha)/2, 0.1, 0.1) until
///   (b/2)(a + c + 2) exp(2 pi / g(alpha)) < alpha_inf                  and
///   (c e^{-1} + a + 2 b c e^{-1} + 2 b (a + 2)) / ((2 - epsilon)(1 - e^{-1}))
///       < sin(2 alpha_inf)
/// both hold (evaluated in log space; overflow-safe). Throws SolverError when
/// no admissible alpha exists or the shrink would leave double range.
Theorem2Parameters theorem2_parameter_builder(double theta0_sup, double epsilon, double kappa);

}  // namespace winfree
