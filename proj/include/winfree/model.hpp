#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace winfree {

/// Parameters of the pulse-coupled oscillator ensemble
///
///     m * theta_i'' + theta_i' = nu_i - kappa * R(Theta) * sin(theta_i)
///
/// with the mean activity R(Theta) = (1/N) * sum_j (1 + cos theta_j).
/// inertia == 0 selects the first-order model theta_i' = nu_i - kappa * R * sin(theta_i).
struct ModelParameters {
    std::vector<double> natural_frequencies;  // nu_i, rad per unit time
    double coupling = 0.0;                    // kappa >= 0
    double inertia = 0.0;                     // m >= 0; 0 means first-order

    std::size_t size() const noexcept { return natural_frequencies.size(); }
    void validate() const;  // throws std::invalid_argument
};

/// Snapshot of the ensemble. Phases live on the real line (lifted), never
/// reduced mod 2*pi: winding counts and phase oscillation are meaningful.
/// velocities is empty for first-order states, size N for second-order ones.
struct EnsembleState {
    std::vector<double> phases;
    std::vector<double> velocities;
    double time = 0.0;

    std::size_t size() const noexcept { return phases.size(); }
    bool has_velocities() const noexcept { return !velocities.empty(); }
};

/// Nested index sets: inner is the candidate trapped cluster, outer the set
/// whose mean activity certifies the trap. Indices are 0-based.
struct ClusterSpec {
    std::vector<std::size_t> inner;
    std::vector<std::size_t> outer;

    void validate(std::size_t n) const;  // inner subset of outer, indices < n
};

/// Dimensionless budget triple (a, b, c) bounding |nu|/kappa, m*kappa and
/// |omega0|/kappa relative to the initial activity level.
struct SmallnessConstants {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Mean activity over the whole ensemble: (1/N) sum_j (1 + cos theta_j), in [0, 2].
double order_parameter(const EnsembleState& state);

/// Restriction of the activity sum to a subset, still normalized by the full N:
/// (1/N) sum_{i in subset} (1 + cos theta_i). Additive over disjoint subsets.
double order_parameter(const EnsembleState& state, std::span<const std::size_t> subset);

/// Phase-space velocity field F_i(Theta) = nu_i - kappa * R(Theta) * sin(theta_i).
std::vector<double> winfree_rhs(const EnsembleState& state, const ModelParameters& params);

/// Allocation-free form of winfree_rhs for integrator hot paths.
void winfree_rhs_into(std::span<const double> phases, const ModelParameters& params,
                      std::span<double> out);

/// P(Theta) = -sum_k nu_k theta_k - (kappa N / 2) R(Theta)^2.
/// The first-order flow is the gradient descent of P.
double potential(const EnsembleState& state, const ModelParameters& params);

/// Analytic gradient of the potential; equals -winfree_rhs componentwise,
/// computed through the same arithmetic path so the identity is bitwise.
std::vector<double> potential_gradient(const EnsembleState& state, const ModelParameters& params);

/// True when every phase sits at an equilibrium of its own pull:
/// nu_i = kappa * R(Theta) * sin(theta_i) within tol, for all i.
/// Velocity stillness is a separate check (see detect_death on trajectories).
bool is_death_state(const EnsembleState& state, const ModelParameters& params, double tol);

/// Uniform field bound sup |F_i| <= max_{i in subset} |nu_i| + 2 * kappa.
/// An empty subset means the whole ensemble.
double force_sup_bound(const ModelParameters& params, std::span<const std::size_t> subset = {});

enum class SystemOrder { first, second };

/// Weight for volume contraction measured against h(R) * Lebesgue.
/// Both handles are evaluated at R by the callee.
struct RWeight {
    std::function<double(double)> h;
    std::function<double(double)> h_prime;
};

/// Divergence of the flow field at a state.
///  - first order:   kappa * (N R (1 - R) + (1/N) sum_i sin^2 theta_i)
///  - second order:  -N / m (constant), requires inertia > 0
///  - second order with weight: -N/m - (h'(R)/h(R)) * (1/N) sum_i p_i sin theta_i,
///    requires velocities.
double divergence(const EnsembleState& state, const ModelParameters& params, SystemOrder order,
                  const std::optional<RWeight>& weight = std::nullopt);

}  // namespace winfree
