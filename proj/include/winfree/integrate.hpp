#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "winfree/model.hpp"

namespace winfree {

enum class Method {
    adaptive_rk,        // embedded Dormand-Prince 5(4), explicit
    exponential_split,  // relaxation treated exactly, field along a linear-in-time
                        // profile, step-doubling error control; exact when kappa == 0
};

struct IntegratorOptions {
    Method method = Method::exponential_split;
    double rel_tolerance = 1e-8;   // in (0, 1)
    double abs_tolerance = 1e-10;  // in (0, 1)
    double max_step = 10.0;
    double initial_step = 1e-3;
    double sample_interval = 0.1;  // <= t_end

    void validate(double t_end) const;  // throws std::invalid_argument
};

/// Samples of one integration run. samples[0] is the supplied initial state,
/// the last sample sits exactly at t_end, interior samples at multiples of
/// sample_interval. For first-order runs the velocity slots hold the exact
/// instantaneous phase velocities F(Theta(t)).
struct Trajectory {
    std::vector<EnsembleState> samples;
    ModelParameters params;
    IntegratorOptions options;
    std::uint64_t accepted_steps = 0;
    std::uint64_t rejected_steps = 0;

    std::size_t size() const noexcept { return samples.size(); }
    const EnsembleState& front() const { return samples.front(); }
    const EnsembleState& back() const { return samples.back(); }
    double duration() const { return samples.back().time - samples.front().time; }
};

struct DeathVerdict {
    bool died = false;
    double residual_velocity = 0.0;  // max |theta_i'| over the inspected window
    double phase_oscillation = 0.0;  // max_i osc(theta_i) over the inspected window
    std::optional<double> settle_time;
    std::optional<std::vector<double>> final_phase_estimate;
};

/// Raised when the step controller underflows (stiffness failure); carries the
/// last accepted state so callers can inspect how far the run got.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, EnsembleState last);
    const EnsembleState& last_state() const noexcept { return last_; }

private:
    EnsembleState last_;
};

/// Integrates m theta'' + theta' = F(Theta) from a state with velocities.
/// Requires params.inertia > 0 (throws std::domain_error otherwise).
Trajectory integrate_second_order(const EnsembleState& initial, const ModelParameters& params,
                                  double t_end, const IntegratorOptions& options);

/// Integrates theta' = F(Theta); initial velocities are ignored.
Trajectory integrate_first_order(const EnsembleState& initial, const ModelParameters& params,
                                 double t_end, const IntegratorOptions& options);

/// Scans the trailing `window` time units of a trajectory. died == true iff
/// max_i |theta_i'| <= velocity_tol at every sample in the window and
/// max_i osc(theta_i) <= velocity_tol * window there. settle_time is the
/// earliest sample time from which the velocity criterion holds to the end.
DeathVerdict detect_death(const Trajectory& traj, double velocity_tol, double window);

/// Sup over samples and oscillators of the defect in the integrated
/// variation-of-constants identity
///   theta_i(t) = theta_i(0) + m omega_i(0) (1 - e^{-t/m})
///                + int_0^t F_i(Theta(s)) (1 - e^{-(t-s)/m}) ds,
/// with the integral taken by trapezoid on the sample grid (kernel analytic).
/// Requires a second-order trajectory.
double duhamel_residual(const Trajectory& traj, const ModelParameters& params);

/// Header `t,theta_1..theta_N,omega_1..omega_N`, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace winfree
