#include "winfree/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace winfree {

void ModelParameters::validate() const {
    if (natural_frequencies.empty()) {
        throw std::invalid_argument("model: need at least one oscillator");
    }
    for (double nu : natural_frequencies) {
        if (!std::isfinite(nu)) throw std::invalid_argument("model: non-finite frequency");
    }
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
        throw std::invalid_argument("model: coupling must be finite and >= 0");
    }
    if (!(inertia >= 0.0) || !std::isfinite(inertia)) {
        throw std::invalid_argument("model: inertia must be finite and >= 0");
    }
}

void ClusterSpec::validate(std::size_t n) const {
    for (std::size_t i : outer) {
        if (i >= n) throw std::invalid_argument("cluster: outer index out of range");
    }
    for (std::size_t i : inner) {
        if (i >= n) throw std::invalid_argument("cluster: inner index out of range");
        if (std::find(outer.begin(), outer.end(), i) == outer.end()) {
            throw std::invalid_argument("cluster: inner must be a subset of outer");
        }
    }
}

double order_parameter(const EnsembleState& state) {
    if (state.phases.empty()) throw std::invalid_argument("order_parameter: empty state");
    double sum = 0.0;
    for (double th : state.phases) sum += 1.0 + std::cos(th);
    return sum / static_cast<double>(state.phases.size());
}

double order_parameter(const EnsembleState& state, std::span<const std::size_t> subset) {
    const std::size_t n = state.phases.size();
    if (n == 0) throw std::invalid_argument("order_parameter: empty state");
    double sum = 0.0;
    for (std::size_t i : subset) {
        if (i >= n) throw std::invalid_argument("order_parameter: subset index out of range");
        sum += 1.0 + std::cos(state.phases[i]);
    }
    return sum / static_cast<double>(n);
}

void winfree_rhs_into(std::span<const double> phases, const ModelParameters& params,
                      std::span<double> out) {
    const std::size_t n = phases.size();
    double r = 0.0;
    for (double th : phases) r += 1.0 + std::cos(th);
    r /= static_cast<double>(n);
    const double pull = params.coupling * r;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = params.natural_frequencies[i] - pull * std::sin(phases[i]);
    }
}

std::vector<double> winfree_rhs(const EnsembleState& state, const ModelParameters& params) {
    if (state.phases.size() != params.size()) {
        throw std::invalid_argument("winfree_rhs: state/parameter size mismatch");
    }
    if (state.phases.empty()) throw std::invalid_argument("winfree_rhs: empty state");
    std::vector<double> out(state.phases.size());
    winfree_rhs_into(state.phases, params, out);
    return out;
}

double potential(const EnsembleState& state, const ModelParameters& params) {
    if (state.phases.size() != params.size()) {
        throw std::invalid_argument("potential: state/parameter size mismatch");
    }
    const double n = static_cast<double>(state.phases.size());
    const double r = order_parameter(state);
    double drift = 0.0;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        drift += params.natural_frequencies[i] * state.phases[i];
    }
    return -drift - 0.5 * params.coupling * n * r * r;
}

std::vector<double> potential_gradient(const EnsembleState& state, const ModelParameters& params) {
    // same arithmetic path as the field, negated, so grad P == -F bitwise
    std::vector<double> grad = winfree_rhs(state, params);
    for (double& g : grad) g = -g;
    return grad;
}

bool is_death_state(const EnsembleState& state, const ModelParameters& params, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("is_death_state: tol must be >= 0");
    const std::vector<double> f = winfree_rhs(state, params);
    return std::all_of(f.begin(), f.end(), [tol](double v) { return std::fabs(v) <= tol; });
}

double force_sup_bound(const ModelParameters& params, std::span<const std::size_t> subset) {
    double nu_sup = 0.0;
    if (subset.empty()) {
        for (double nu : params.natural_frequencies) nu_sup = std::max(nu_sup, std::fabs(nu));
    } else {
        for (std::size_t i : subset) {
            if (i >= params.size()) {
                throw std::invalid_argument("force_sup_bound: subset index out of range");
            }
            nu_sup = std::max(nu_sup, std::fabs(params.natural_frequencies[i]));
        }
    }
    return nu_sup + 2.0 * params.coupling;
}

double divergence(const EnsembleState& state, const ModelParameters& params, SystemOrder order,
                  const std::optional<RWeight>& weight) {
    if (state.phases.size() != params.size()) {
        throw std::invalid_argument("divergence: state/parameter size mismatch");
    }
    const double n = static_cast<double>(state.phases.size());
    if (order == SystemOrder::first) {
        if (weight) throw std::invalid_argument("divergence: weight applies to the second-order flow");
        const double r = order_parameter(state);
        double sin2 = 0.0;
        for (double th : state.phases) {
            const double s = std::sin(th);
            sin2 += s * s;
        }
        return params.coupling * (n * r * (1.0 - r) + sin2 / n);
    }
    if (!(params.inertia > 0.0)) {
        throw std::domain_error("divergence: second-order flow needs inertia > 0");
    }
    const double base = -n / params.inertia;
    if (!weight) return base;
    if (!weight->h || !weight->h_prime) {
        throw std::invalid_argument("divergence: weight handles must both be set");
    }
    if (state.velocities.size() != state.phases.size()) {
        throw std::invalid_argument("divergence: weighted form needs velocities");
    }
    const double r = order_parameter(state);
    const double h = weight->h(r);
    if (h == 0.0) throw std::domain_error("divergence: weight h(R) vanishes");
    double s = 0.0;
    for (std::size_t i = 0; i < state.phases.size(); ++i) {
        s += state.velocities[i] * std::sin(state.phases[i]);
    }
    s /= n;
    return base - (weight->h_prime(r) / h) * s;
}

}  // namespace winfree
