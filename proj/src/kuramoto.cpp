#include "winfree/kuramoto.hpp"

#include <cmath>
#include <stdexcept>

#include "winfree/ode.hpp"

namespace winfree {

void KuramotoSystem::validate() const {
    if (frequencies.empty() || frequencies.size() % 4 != 0) {
        throw std::invalid_argument("kuramoto: frequency count must be a positive multiple of 4");
    }
    if (!(coupling >= 0.0)) throw std::invalid_argument("kuramoto: coupling must be >= 0");
    if (!(inertia >= 0.0)) throw std::invalid_argument("kuramoto: inertia must be >= 0");
}

EmbeddedState embed(const EnsembleState& state, const ModelParameters& params) {
    params.validate();
    const std::size_t n = params.size();
    if (state.phases.size() != n) {
        throw std::invalid_argument("embed: state/parameter size mismatch");
    }
    EmbeddedState out;
    out.system.coupling = 2.0 * params.coupling;
    out.system.inertia = params.inertia;
    out.system.frequencies.assign(4 * n, 0.0);
    out.phases.assign(4 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.system.frequencies[i] = params.natural_frequencies[i];
        out.system.frequencies[n + i] = -params.natural_frequencies[i];
        out.phases[i] = state.phases[i];
        out.phases[n + i] = -state.phases[i];
    }
    if (state.has_velocities()) {
        if (state.velocities.size() != n) {
            throw std::invalid_argument("embed: velocity/phase size mismatch");
        }
        out.velocities.assign(4 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            out.velocities[i] = state.velocities[i];
            out.velocities[n + i] = -state.velocities[i];
        }
    }
    return out;
}

namespace {

void kuramoto_rhs_into(std::span<const double> phases, const KuramotoSystem& system,
                       std::span<double> out) {
    const std::size_t total = phases.size();
    double s = 0.0;
    double c = 0.0;
    for (double phi : phases) {
        s += std::sin(phi);
        c += std::cos(phi);
    }
    const double gain = system.coupling / static_cast<double>(total);
    for (std::size_t k = 0; k < total; ++k) {
        // sum_l sin(phi_l - phi_k) = cos(phi_k) * S - sin(phi_k) * C
        out[k] = system.frequencies[k] + gain * (std::cos(phases[k]) * s - std::sin(phases[k]) * c);
    }
}

}  // namespace

std::vector<double> kuramoto_rhs(std::span<const double> phases, const KuramotoSystem& system) {
    system.validate();
    if (phases.size() != system.size()) {
        throw std::invalid_argument("kuramoto_rhs: phase/system size mismatch");
    }
    std::vector<double> out(phases.size());
    kuramoto_rhs_into(phases, system, out);
    return out;
}

Trajectory integrate_kuramoto(std::span<const double> phases0, std::span<const double> velocities0,
                              const KuramotoSystem& system, double t_end,
                              const IntegratorOptions& options) {
    system.validate();
    if (phases0.size() != system.size()) {
        throw std::invalid_argument("integrate_kuramoto: phase/system size mismatch");
    }
    ode::VectorField field = [&system](std::span<const double> phi, std::span<double> out) {
        kuramoto_rhs_into(phi, system, out);
    };
    ode::RawTrajectory raw;
    if (system.inertia > 0.0) {
        raw = ode::integrate_inertial(field, phases0, velocities0, system.inertia, t_end, options);
    } else {
        raw = ode::integrate_first_order_field(field, phases0, t_end, options);
    }
    Trajectory traj;
    traj.params.natural_frequencies = system.frequencies;
    traj.params.coupling = system.coupling;
    traj.params.inertia = system.inertia;
    traj.options = options;
    traj.accepted_steps = raw.accepted;
    traj.rejected_steps = raw.rejected;
    traj.samples.reserve(raw.times.size());
    for (std::size_t k = 0; k < raw.times.size(); ++k) {
        EnsembleState s;
        s.time = raw.times[k];
        s.phases = std::move(raw.phases[k]);
        s.velocities = std::move(raw.velocities[k]);
        traj.samples.push_back(std::move(s));
    }
    return traj;
}

double verify_embedding(const Trajectory& base_traj, const Trajectory& kuramoto_traj) {
    if (base_traj.size() != kuramoto_traj.size()) {
        throw std::invalid_argument("verify_embedding: sample grids differ in size");
    }
    const std::size_t n = base_traj.front().size();
    if (kuramoto_traj.front().size() != 4 * n) {
        throw std::invalid_argument("verify_embedding: companion system is not 4N-dimensional");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < base_traj.size(); ++k) {
        const EnsembleState& a = base_traj.samples[k];
        const EnsembleState& b = kuramoto_traj.samples[k];
        if (std::fabs(a.time - b.time) > 1e-12 * std::max(1.0, std::fabs(a.time))) {
            throw std::invalid_argument("verify_embedding: sample grids disagree");
        }
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::fabs(b.phases[i] - a.phases[i]));
            worst = std::max(worst, std::fabs(b.phases[n + i] + a.phases[i]));
        }
        for (std::size_t i = 2 * n; i < 4 * n; ++i) {
            worst = std::max(worst, std::fabs(b.phases[i]));
        }
    }
    return worst;
}

}  // namespace winfree
