#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "winfree/integrate.hpp"
#include "winfree/model.hpp"

namespace winfree {

/// Sup-norm gap between the inertial flow and its first-order limit started
/// from the same phases, on the shared sample grid. Velocity flags are only
/// evaluated from t >= m onward: the initial relaxation layer carries an O(1)
/// velocity mismatch by design.
struct GapReport {
    double inertia = 0.0;
    std::vector<double> times;
    std::vector<double> phase_gap;
    std::vector<double> phase_bound;
    std::vector<double> velocity_gap;
    std::vector<double> velocity_bound;
    bool phase_satisfied = false;     // all t: phase_gap <= phase_bound + 1e-9
    bool velocity_satisfied = false;  // all t >= m: velocity_gap <= velocity_bound + 1e-9

    double sup_phase_gap() const;
};

/// (1/2) m (max|omega0_i - nu_i| + 2 kappa) e^{4 kappa t}. Requires m > 0, t >= 0.
double phase_gap_bound(double t, double m, const ModelParameters& params,
                       std::span<const double> omega0);

/// (1/2) (max|omega0_i - nu_i| + 2 kappa) e^{-t/m}
///   + 2 m kappa (max|nu_i| + 2 kappa)
///   + 2 m kappa (max|omega0_i - nu_i| + 2 kappa) e^{4 kappa t}.
double velocity_gap_bound(double t, double m, const ModelParameters& params,
                          std::span<const double> omega0);

/// Runs both systems from initial (which must carry velocities) to t_end and
/// assembles the gap curves against the two bounds above. Both integrations
/// use the same sample_interval, so the grids agree exactly.
GapReport compare_trajectories(const EnsembleState& initial, const ModelParameters& params,
                               double t_end, const IntegratorOptions& options);

/// Header `t,phase_gap,phase_bound,velocity_gap,velocity_bound`, 17 significant digits.
void write_gap_csv(const GapReport& report, std::ostream& os);

}  // namespace winfree
