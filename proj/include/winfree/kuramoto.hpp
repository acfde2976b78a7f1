#pragma once

#include <span>
#include <vector>

#include "winfree/integrate.hpp"
#include "winfree/model.hpp"

namespace winfree {

/// All-to-all sine-coupled system of 4N oscillators,
///   m phi_k'' + phi_k' = nu~_k + (coupling / 4N) sum_l sin(phi_l - phi_k),
/// built by embed() so that phi = (Theta, -Theta, 0, ..., 0) flows exactly like
/// the N-oscillator pulse-coupled system with kappa = coupling / 2.
struct KuramotoSystem {
    std::vector<double> frequencies;  // size 4N
    double coupling = 0.0;
    double inertia = 0.0;

    std::size_t size() const noexcept { return frequencies.size(); }
    std::size_t base_size() const noexcept { return frequencies.size() / 4; }
    void validate() const;  // size divisible by 4, coupling >= 0, inertia >= 0
};

struct EmbeddedState {
    KuramotoSystem system;
    std::vector<double> phases;      // (Theta, -Theta, 0_{2N})
    std::vector<double> velocities;  // (Omega, -Omega, 0_{2N}); empty iff source had none
};

/// Mirror construction: frequencies (nu, -nu, 0_{2N}), coupling 2 kappa,
/// inertia copied.
EmbeddedState embed(const EnsembleState& state, const ModelParameters& params);

/// Field of the sine-coupled system, via the mean-field reduction
/// sum_l sin(phi_l - phi_k) = cos(phi_k) S - sin(phi_k) C.
std::vector<double> kuramoto_rhs(std::span<const double> phases, const KuramotoSystem& system);

/// Same integrators as the base model; system.inertia == 0 selects first order
/// (velocities0 then ignored). Trajectory params carry (nu~, coupling, inertia).
Trajectory integrate_kuramoto(std::span<const double> phases0, std::span<const double> velocities0,
                              const KuramotoSystem& system, double t_end,
                              const IntegratorOptions& options);

/// Sup over the shared sample grid of the embedding defect
///   max( |phi_i - theta_i|, |phi_{N+i} + theta_i|, |phi_{2N+k}| ).
/// Throws std::invalid_argument when the grids differ (size or times beyond 1e-12).
double verify_embedding(const Trajectory& base_traj, const Trajectory& kuramoto_traj);

}  // namespace winfree
