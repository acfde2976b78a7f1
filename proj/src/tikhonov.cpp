#include "winfree/tikhonov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace winfree {
namespace {

double gap_scale(const ModelParameters& params, std::span<const double> omega0) {
    // max_i |omega0_i - nu_i| + 2 kappa
    double s = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double w = omega0.empty() ? 0.0 : omega0[i];
        s = std::max(s, std::fabs(w - params.natural_frequencies[i]));
    }
    return s + 2.0 * params.coupling;
}

void check_bound_args(double t, double m, const ModelParameters& params,
                      std::span<const double> omega0) {
    params.validate();
    if (!(m > 0.0)) throw std::domain_error("tikhonov bound: needs m > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("tikhonov bound: t must be >= 0");
    if (!omega0.empty() && omega0.size() != params.size()) {
        throw std::invalid_argument("tikhonov bound: omega0 must be empty or size N");
    }
}

std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double GapReport::sup_phase_gap() const {
    double s = 0.0;
    for (double g : phase_gap) s = std::max(s, g);
    return s;
}

double phase_gap_bound(double t, double m, const ModelParameters& params,
                       std::span<const double> omega0) {
    check_bound_args(t, m, params, omega0);
    return 0.5 * m * gap_scale(params, omega0) * std::exp(4.0 * params.coupling * t);
}

double velocity_gap_bound(double t, double m, const ModelParameters& params,
                          std::span<const double> omega0) {
    check_bound_args(t, m, params, omega0);
    const double scale = gap_scale(params, omega0);
    double nu_sup = 0.0;
    for (double nu : params.natural_frequencies) nu_sup = std::max(nu_sup, std::fabs(nu));
    const double mk = 2.0 * m * params.coupling;
    return 0.5 * scale * std::exp(-t / m) + mk * (nu_sup + 2.0 * params.coupling) +
           mk * scale * std::exp(4.0 * params.coupling * t);
}

GapReport compare_trajectories(const EnsembleState& initial, const ModelParameters& params,
                               double t_end, const IntegratorOptions& options) {
    params.validate();
    const double m = params.inertia;
    if (!(m > 0.0)) throw std::domain_error("compare_trajectories: needs inertia > 0");
    if (initial.velocities.size() != params.size()) {
        throw std::invalid_argument("compare_trajectories: initial state needs velocities");
    }

    Trajectory inertial = integrate_second_order(initial, params, t_end, options);
    ModelParameters limit_params = params;
    limit_params.inertia = 0.0;
    EnsembleState limit_initial;
    limit_initial.phases = initial.phases;
    limit_initial.time = initial.time;
    Trajectory limit = integrate_first_order(limit_initial, limit_params, t_end, options);
    if (inertial.size() != limit.size()) {
        throw std::runtime_error("compare_trajectories: sample grids disagree");
    }

    constexpr double kSlack = 1e-9;
    GapReport report;
    report.inertia = m;
    report.phase_satisfied = true;
    report.velocity_satisfied = true;
    const std::size_t n = params.size();
    const double t0 = initial.time;
    for (std::size_t k = 0; k < inertial.size(); ++k) {
        const EnsembleState& a = inertial.samples[k];
        const EnsembleState& b = limit.samples[k];
        const double t = a.time - t0;
        double pg = 0.0;
        double vg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pg = std::max(pg, std::fabs(a.phases[i] - b.phases[i]));
            vg = std::max(vg, std::fabs(a.velocities[i] - b.velocities[i]));
        }
        const double pb = phase_gap_bound(t, m, params, initial.velocities);
        const double vb = velocity_gap_bound(t, m, params, initial.velocities);
        report.times.push_back(a.time);
        report.phase_gap.push_back(pg);
        report.phase_bound.push_back(pb);
        report.velocity_gap.push_back(vg);
        report.velocity_bound.push_back(vb);
        if (pg > pb + kSlack) report.phase_satisfied = false;
        // the velocity comparison only makes sense once the relaxation layer
        // has passed; before t = m the inertial velocity still remembers omega0
        if (t >= m && vg > vb + kSlack) report.velocity_satisfied = false;
    }
    return report;
}

void write_gap_csv(const GapReport& report, std::ostream& os) {
    os << "t,phase_gap,phase_bound,velocity_gap,velocity_bound\n";
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        std::string row = format(report.times[k]);
        row += ',';
        row += format(report.phase_gap[k]);
        row += ',';
        row += format(report.phase_bound[k]);
        row += ',';
        row += format(report.velocity_gap[k]);
        row += ',';
        row += format(report.velocity_bound[k]);
        row += '\n';
        os << row;
    }
}

}  // namespace winfree
