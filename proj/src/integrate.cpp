#include "winfree/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "winfree/ode.hpp"

namespace winfree {
namespace {

void format_into(std::string& row, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    row += buf;
}

Trajectory assemble(ode::RawTrajectory&& raw, const EnsembleState& initial,
                    const ModelParameters& params, const IntegratorOptions& options, double t_end) {
    Trajectory traj;
    traj.params = params;
    traj.options = options;
    traj.accepted_steps = raw.accepted;
    traj.rejected_steps = raw.rejected;
    traj.samples.reserve(raw.times.size());
    for (std::size_t k = 0; k < raw.times.size(); ++k) {
        EnsembleState s;
        s.time = initial.time + raw.times[k];
        s.phases = std::move(raw.phases[k]);
        s.velocities = std::move(raw.velocities[k]);
        traj.samples.push_back(std::move(s));
    }
    traj.samples.front().time = initial.time;
    traj.samples.back().time = t_end;
    return traj;
}

}  // namespace

void IntegratorOptions::validate(double t_end) const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(rel_tolerance) || !in_unit(abs_tolerance)) {
        throw std::invalid_argument("integrator: tolerances must lie in (0, 1)");
    }
    if (!(max_step > 0.0) || !(initial_step > 0.0)) {
        throw std::invalid_argument("integrator: steps must be positive");
    }
    if (!(t_end > 0.0)) throw std::invalid_argument("integrator: horizon must be positive");
    if (!(sample_interval > 0.0) || sample_interval > t_end) {
        throw std::invalid_argument("integrator: sample_interval must lie in (0, horizon]");
    }
    if (t_end / sample_interval > 2e7) {
        throw std::invalid_argument("integrator: sample grid would exceed 2e7 points");
    }
}

IntegrationError::IntegrationError(const std::string& what, EnsembleState last)
    : std::runtime_error(what), last_(std::move(last)) {}

Trajectory integrate_second_order(const EnsembleState& initial, const ModelParameters& params,
                                  double t_end, const IntegratorOptions& options) {
    params.validate();
    if (initial.phases.size() != params.size()) {
        throw std::invalid_argument("integrate: state/parameter size mismatch");
    }
    if (!(params.inertia > 0.0)) {
        throw std::domain_error("integrate: second-order model needs inertia > 0");
    }
    const double duration = t_end - initial.time;
    ode::VectorField field = [&params](std::span<const double> th, std::span<double> out) {
        winfree_rhs_into(th, params, out);
    };
    auto raw = ode::integrate_inertial(field, initial.phases, initial.velocities, params.inertia,
                                       duration, options);
    return assemble(std::move(raw), initial, params, options, t_end);
}

Trajectory integrate_first_order(const EnsembleState& initial, const ModelParameters& params,
                                 double t_end, const IntegratorOptions& options) {
    params.validate();
    if (initial.phases.size() != params.size()) {
        throw std::invalid_argument("integrate: state/parameter size mismatch");
    }
    const double duration = t_end - initial.time;
    ode::VectorField field = [&params](std::span<const double> th, std::span<double> out) {
        winfree_rhs_into(th, params, out);
    };
    auto raw = ode::integrate_first_order_field(field, initial.phases, duration, options);
    return assemble(std::move(raw), initial, params, options, t_end);
}

DeathVerdict detect_death(const Trajectory& traj, double velocity_tol, double window) {
    if (traj.size() < 2) throw std::invalid_argument("detect_death: trajectory too short");
    if (!(velocity_tol > 0.0)) throw std::invalid_argument("detect_death: velocity_tol must be > 0");
    const double duration = traj.duration();
    if (!(window > 0.0) || window >= duration) {
        throw std::invalid_argument("detect_death: window must lie in (0, duration)");
    }
    const double t_last = traj.back().time;
    const double cut = t_last - window - 1e-12 * std::max(1.0, std::fabs(t_last));
    std::size_t first = traj.size();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.samples[k].time >= cut) {
            first = k;
            break;
        }
    }
    if (first + 2 > traj.size()) {
        throw std::invalid_argument("detect_death: window contains fewer than two samples");
    }
    const std::size_t n = traj.front().size();
    DeathVerdict verdict;
    std::vector<double> lo(n, std::numeric_limits<double>::infinity());
    std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
    double vmax = 0.0;
    for (std::size_t k = first; k < traj.size(); ++k) {
        const EnsembleState& s = traj.samples[k];
        if (s.velocities.size() != n) {
            throw std::invalid_argument("detect_death: sample without velocities");
        }
        for (std::size_t i = 0; i < n; ++i) {
            vmax = std::max(vmax, std::fabs(s.velocities[i]));
            lo[i] = std::min(lo[i], s.phases[i]);
            hi[i] = std::max(hi[i], s.phases[i]);
        }
    }
    double osc = 0.0;
    for (std::size_t i = 0; i < n; ++i) osc = std::max(osc, hi[i] - lo[i]);
    verdict.residual_velocity = vmax;
    verdict.phase_oscillation = osc;
    verdict.died = vmax <= velocity_tol && osc <= velocity_tol * window;
    if (verdict.died) {
        // earliest sample from which the velocity criterion holds to the end
        std::size_t settle = first;
        while (settle > 0) {
            const EnsembleState& s = traj.samples[settle - 1];
            if (s.velocities.size() != n) break;
            double v = 0.0;
            for (double w : s.velocities) v = std::max(v, std::fabs(w));
            if (v > velocity_tol) break;
            --settle;
        }
        verdict.settle_time = traj.samples[settle].time;
        verdict.final_phase_estimate = traj.back().phases;
    }
    return verdict;
}

double duhamel_residual(const Trajectory& traj, const ModelParameters& params) {
    if (traj.size() < 2) throw std::invalid_argument("duhamel_residual: trajectory too short");
    const double m = params.inertia;
    if (!(m > 0.0)) throw std::domain_error("duhamel_residual: needs inertia > 0");
    const std::size_t n = traj.front().size();
    if (params.size() != n) {
        throw std::invalid_argument("duhamel_residual: state/parameter size mismatch");
    }
    if (traj.front().velocities.size() != n) {
        throw std::invalid_argument("duhamel_residual: needs a second-order trajectory");
    }
    const std::size_t count = traj.size();
    std::vector<std::vector<double>> f(count);
    for (std::size_t k = 0; k < count; ++k) f[k] = winfree_rhs(traj.samples[k], params);

    const double t0 = traj.front().time;
    const std::vector<double>& th0 = traj.front().phases;
    const std::vector<double>& om0 = traj.front().velocities;
    std::vector<double> quad(n, 0.0);
    double worst = 0.0;
    for (std::size_t k = 1; k < count; ++k) {
        const double t = traj.samples[k].time - t0;
        // trapezoid over the grid points up to k with the analytic kernel
        std::fill(quad.begin(), quad.end(), 0.0);
        for (std::size_t j = 0; j + 1 <= k; ++j) {
            const double sj = traj.samples[j].time - t0;
            const double sj1 = traj.samples[j + 1].time - t0;
            const double w = 0.5 * (sj1 - sj);
            const double kj = -std::expm1(-(t - sj) / m);
            const double kj1 = -std::expm1(-(t - sj1) / m);
            for (std::size_t i = 0; i < n; ++i) {
                quad[i] += w * (kj * f[j][i] + kj1 * f[j + 1][i]);
            }
        }
        const double layer = -std::expm1(-t / m);
        for (std::size_t i = 0; i < n; ++i) {
            const double predicted = th0[i] + m * om0[i] * layer + quad[i];
            worst = std::max(worst, std::fabs(traj.samples[k].phases[i] - predicted));
        }
    }
    return worst;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const std::size_t n = traj.front().size();
    std::string row = "t";
    for (std::size_t i = 1; i <= n; ++i) row += ",theta_" + std::to_string(i);
    for (std::size_t i = 1; i <= n; ++i) row += ",omega_" + std::to_string(i);
    row += "\n";
    os << row;
    for (const EnsembleState& s : traj.samples) {
        row.clear();
        format_into(row, s.time);
        for (std::size_t i = 0; i < n; ++i) {
            row += ',';
            format_into(row, s.phases[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            row += ',';
            format_into(row, s.velocities.empty() ? 0.0 : s.velocities[i]);
        }
        row += "\n";
        os << row;
    }
}

}  // namespace winfree
