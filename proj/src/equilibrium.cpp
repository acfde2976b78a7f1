#include "winfree/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace winfree {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPeak = kPi / 3.0;  // argmax of the response on [0, pi]

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

void check_alpha(double alpha) {
    if (!(alpha > kPeak) || !(alpha < kPi)) {
        throw std::domain_error("alpha must lie in (pi/3, pi)");
    }
}

}  // namespace

double equilibrium_response(double s) { return std::sin(s) * (1.0 + std::cos(s)); }

AlphaPair alpha_infinity(double alpha) {
    check_alpha(alpha);
    const double level = equilibrium_response(alpha);
    // rising branch: response increases from 0 at 0 to its peak at pi/3
    double lo = 0.0;
    double hi = kPeak;
    for (int iter = 0; iter < 200 && hi - lo > 1e-17; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (equilibrium_response(mid) < level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    AlphaPair pair;
    pair.alpha = alpha;
    pair.alpha_inf = std::fabs(equilibrium_response(lo) - level) <
                             std::fabs(equilibrium_response(hi) - level)
                         ? lo
                         : hi;
    return pair;
}

CertificateReport equilibrium_exists(const ModelParameters& params, double alpha) {
    params.validate();
    check_alpha(alpha);
    if (!(params.coupling > 0.0)) {
        throw std::domain_error("equilibrium_exists: needs coupling > 0");
    }
    CertificateReport c;
    c.name = "equilibrium-exists";
    c.anchor = "pinning-capacity";
    c.lhs = sup_abs(params.natural_frequencies) / params.coupling;
    c.rhs = equilibrium_response(alpha);
    c.satisfied = c.lhs < c.rhs;
    c.margin = c.rhs - c.lhs;
    return c;
}

double entrance_time_bound(const ModelParameters& params, double alpha) {
    params.validate();
    check_alpha(alpha);
    const double denom =
        params.coupling * equilibrium_response(alpha) - sup_abs(params.natural_frequencies);
    if (!(denom > 0.0)) {
        throw std::domain_error("entrance_time_bound: drive exceeds the pinning capacity");
    }
    return kPi / denom;
}

EnsembleState find_equilibrium(const ModelParameters& params, double alpha) {
    params.validate();
    check_alpha(alpha);
    if (!(params.coupling > 0.0)) {
        throw std::domain_error("find_equilibrium: needs coupling > 0");
    }
    const std::size_t n = params.size();
    const double kappa = params.coupling;

    // scalar activity iteration: R -> (1/N) sum (1 + sqrt(1 - (nu_i / kappa R)^2)),
    // started at the ceiling R = 2 so the sequence walks down onto the largest
    // fixed point; damping halves on oscillation
    auto activity_map = [&](double r) {
        double acc = 0.0;
        for (double nu : params.natural_frequencies) {
            const double u = nu / (kappa * r);
            if (!(std::fabs(u) <= 1.0)) {
                throw SolverError("find_equilibrium: iterate left the principal branch at R = " +
                                  std::to_string(r));
            }
            acc += 1.0 + std::sqrt(1.0 - u * u);
        }
        return acc / static_cast<double>(n);
    };

    double r = 2.0;
    double damping = 1.0;
    double prev_delta = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
        const double delta = activity_map(r) - r;
        if (std::fabs(delta) < 1e-15) break;
        if (prev_delta != 0.0 && std::signbit(delta) != std::signbit(prev_delta)) {
            damping = std::max(0.05, 0.5 * damping);
        }
        prev_delta = delta;
        r += damping * delta;
        if (!(r > 0.0)) throw SolverError("find_equilibrium: activity iterate collapsed");
    }

    EnsembleState state;
    state.phases.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.phases[i] = std::asin(params.natural_frequencies[i] / (kappa * r));
    }
    const std::vector<double> f = winfree_rhs(state, params);
    const double residual = sup_abs(f);
    if (!(residual <= 1e-10)) {
        throw SolverError("find_equilibrium: residual " + std::to_string(residual) +
                          " exceeds 1e-10");
    }
    const AlphaPair pair = alpha_infinity(alpha);
    for (double th : state.phases) {
        if (!(std::fabs(th) < pair.alpha_inf)) {
            throw SolverError("find_equilibrium: fixed point escapes the contraction box");
        }
    }
    return state;
}

double exponential_rate(const AlphaPair& pair, double kappa) {
    if (!(kappa > 0.0)) throw std::domain_error("exponential_rate: needs coupling > 0");
    if (!(pair.alpha_inf >= 0.0) || !(pair.alpha_inf <= kPeak)) {
        throw std::domain_error("exponential_rate: alpha_inf must lie in [0, pi/3]");
    }
    const double c = std::cos(pair.alpha_inf);
    return kappa * (2.0 * c - 1.0) * (c + 1.0);
}

Theorem2Parameters theorem2_parameter_builder(double theta0_sup, double epsilon, double kappa) {
    if (!(theta0_sup >= 0.0) || !(theta0_sup < kPi)) {
        throw std::invalid_argument("parameter builder: theta0_sup must lie in [0, pi)");
    }
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw std::invalid_argument("parameter builder: epsilon must lie in (0, 1)");
    }
    if (!(kappa > 0.0)) throw std::domain_error("parameter builder: needs coupling > 0");

    const double floor = std::max(theta0_sup, kPeak);
    const double level = 1.0 - 0.5 * epsilon;
    auto wide_enough = [&](double alpha) {
        return std::cos(2.0 * alpha_infinity(alpha).alpha_inf) > level;
    };
    // cos(2 alpha_inf(alpha)) increases towards 1 as alpha -> pi, so the
    // admissible alphas form a right-open interval; bisect its left edge
    double hi = kPi * (1.0 - 1e-12);
    if (!wide_enough(hi)) {
        throw SolverError("parameter builder: no admissible alpha below pi");
    }
    double lo = floor + 1e-12;
    if (wide_enough(lo)) {
        hi = lo;
    } else {
        for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (wide_enough(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    const double alpha = hi + 0.02 * (kPi - hi);

    Theorem2Parameters out;
    out.alpha = alpha;
    out.pair = alpha_infinity(alpha);
    const double g = equilibrium_response(alpha);
    out.entrance_time = 2.0 * kPi / (kappa * g);

    const double log_alpha_inf = std::log(out.pair.alpha_inf);
    const double sin_gate = std::sin(2.0 * out.pair.alpha_inf);
    const double well = (2.0 - epsilon) * (1.0 - std::exp(-1.0));
    double a = 0.5 * g;
    double b = 0.1;
    double c = 0.1;
    for (;;) {
        // gate 1, in logs to survive exp(2 pi / g) for wide alpha
        const bool g1 = std::log(0.5 * b) + std::log(a + c + 2.0) + 2.0 * kPi / g < log_alpha_inf;
        const double e1 = std::exp(-1.0);
        const bool g2 =
            (c * e1 + a + 2.0 * b * c * e1 + 2.0 * b * (a + 2.0)) / well < sin_gate;
        const bool g3 = b < 2.0 * kPi / g;  // keeps the entrance time >= m
        if (g1 && g2 && g3) break;
        a *= 0.5;
        b *= 0.5;
        c *= 0.5;
        if (b < 1e-300) {
            throw SolverError("parameter builder: budget underflows double range");
        }
    }
    out.constants = SmallnessConstants{a, b, c};
    return out;
}

}  // namespace winfree
