#include "winfree/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace winfree {
namespace {

constexpr double kInvE = 0.36787944117144233;  // e^{-1}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

double sup_abs_at(std::span<const double> v, std::span<const std::size_t> idx) {
    double s = 0.0;
    for (std::size_t i : idx) s = std::max(s, std::fabs(v[i]));
    return s;
}

std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string certificate_csv_row(const CertificateReport& report) {
    std::string row = report.name;
    row += ',';
    row += format(report.lhs);
    row += ',';
    row += format(report.rhs);
    row += ',';
    row += report.satisfied ? "true" : "false";
    row += ',';
    row += format(report.margin);
    row += ',';
    row += report.anchor;
    return row;
}

std::pair<CertificateReport, CertificateReport> theorem1_margins(const SmallnessConstants& k) {
    if (!(k.a > 0.0) || !(k.b > 0.0) || !(k.c > 0.0)) {
        throw std::invalid_argument("theorem1_margins: constants must be positive");
    }
    const double sqrt2 = std::sqrt(2.0);
    CertificateReport first;
    first.name = "constant-margin-entry";
    first.anchor = "full-death-entry-budget";
    first.lhs = 4.0 * k.b * k.c + (2.0 + 2.0 * sqrt2 * k.a) * kInvE * sqrt2 * k.b;
    first.rhs = 0.5;
    first.satisfied = first.lhs < first.rhs;
    first.margin = first.rhs - first.lhs;

    CertificateReport second;
    second.name = "constant-margin-balance";
    second.anchor = "full-death-balance-budget";
    second.lhs = kInvE * k.c + k.a + 4.0 * sqrt2 * kInvE * k.b * k.c +
                 4.0 * k.b * (1.0 + k.a * sqrt2);
    second.rhs = std::sqrt(3.0) / (8.0 * sqrt2) * (1.0 - kInvE);
    second.satisfied = second.lhs <= second.rhs;
    second.margin = second.rhs - second.lhs;
    return {first, second};
}

bool SmallnessReport::all_satisfied() const {
    return applicable && conditions[0].satisfied && conditions[1].satisfied &&
           conditions[2].satisfied;
}

SmallnessReport smallness_check(const EnsembleState& initial, const ModelParameters& params,
                                const SmallnessConstants& k) {
    params.validate();
    if (initial.phases.size() != params.size()) {
        throw std::invalid_argument("smallness_check: state/parameter size mismatch");
    }
    if (!(params.coupling > 0.0)) {
        throw std::domain_error("smallness_check: needs coupling > 0");
    }
    const double r0 = order_parameter(initial);
    const double scale = r0 * std::sqrt(r0);  // R0^{3/2}

    SmallnessReport report;
    report.applicable = r0 > 0.0;

    auto make = [&](const char* name, const char* anchor, double lhs, double budget) {
        CertificateReport c;
        c.name = name;
        c.anchor = anchor;
        c.lhs = lhs;
        c.rhs = budget * scale;
        c.satisfied = report.applicable && c.lhs < c.rhs;
        c.margin = c.rhs - c.lhs;
        return c;
    };
    report.conditions[0] = make("smallness-frequency", "frequency-budget",
                                sup_abs(params.natural_frequencies) / params.coupling, k.a);
    report.conditions[1] =
        make("smallness-inertia", "inertia-budget", params.inertia * params.coupling, k.b);
    report.conditions[2] = make("smallness-velocity", "velocity-budget",
                                sup_abs(initial.velocities) / params.coupling, k.c);
    return report;
}

CertificateReport initial_layer_check(double delta, double eta, const ModelParameters& params,
                                      double omega0_sup, double r0) {
    params.validate();
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("initial_layer_check: delta must lie in (0, 1)");
    }
    if (!(eta > 0.0)) throw std::invalid_argument("initial_layer_check: eta must be > 0");
    if (!(omega0_sup >= 0.0) || !(r0 >= 0.0)) {
        throw std::invalid_argument("initial_layer_check: negative sup or activity");
    }
    const double m = params.inertia;
    const double ramp = -std::expm1(-eta);       // 1 - e^{-eta}
    const double lag = eta + std::expm1(-eta);   // eta - 1 + e^{-eta}
    CertificateReport c;
    c.name = "initial-layer";
    c.anchor = "activity-floor-entry";
    c.lhs = m * omega0_sup * ramp + force_sup_bound(params) * m * lag;
    c.rhs = (1.0 - delta) * r0;
    c.satisfied = c.lhs < c.rhs;
    c.margin = c.rhs - c.lhs;
    return c;
}

double trapping_threshold(const ClusterSpec& cluster, double eta, double rho,
                          const ModelParameters& params, double omega0_cluster_sup) {
    params.validate();
    cluster.validate(params.size());
    if (cluster.outer.empty()) {
        throw std::invalid_argument("trapping_threshold: outer cluster must be non-empty");
    }
    if (!(omega0_cluster_sup >= 0.0)) {
        throw std::invalid_argument("trapping_threshold: negative velocity sup");
    }
    if (!(params.coupling > 0.0) || !(rho > 0.0) || !(eta > 0.0)) {
        throw std::domain_error("trapping_threshold: kappa, rho and eta must be positive");
    }
    const double n = static_cast<double>(params.size());
    const double nb = static_cast<double>(cluster.outer.size());
    const double nu_sup = sup_abs_at(params.natural_frequencies, cluster.outer);
    const double mf = nu_sup + 2.0 * params.coupling;
    const double ev = std::max(eta, 1.0);
    const double numerator =
        omega0_cluster_sup * std::exp(-eta) + nu_sup +
        2.0 * params.coupling *
            ((nb / n) * params.inertia * (omega0_cluster_sup * ev * std::exp(-ev) + mf) +
             (n - nb) / n);
    const double denominator = params.coupling * rho * -std::expm1(-eta);
    const double ratio = numerator / denominator;
    return ratio * ratio;
}

CertificateReport pod_check(const EnsembleState& state_at_t0, const ClusterSpec& cluster,
                            double rho, double x, double eta, const ModelParameters& params,
                            std::span<const double> omega0) {
    params.validate();
    const std::size_t n = params.size();
    if (state_at_t0.phases.size() != n) {
        throw std::invalid_argument("pod_check: state/parameter size mismatch");
    }
    cluster.validate(n);
    if (!(x > -1.0) || !(x < 1.0)) {
        throw std::invalid_argument("pod_check: x must be a cosine level in (-1, 1)");
    }
    if (!omega0.empty() && omega0.size() != n) {
        throw std::invalid_argument("pod_check: omega0 must be empty or size N");
    }
    if (state_at_t0.time < eta * params.inertia) {
        throw std::invalid_argument("pod_check: state precedes the relaxation layer eta*m");
    }
    const double w_b = omega0.empty() ? 0.0 : sup_abs_at(omega0, cluster.outer);
    const double q = trapping_threshold(cluster, eta, rho, params, w_b);
    const double pin_margin = (1.0 - x * x) - q;

    double min_cos = std::numeric_limits<double>::infinity();
    double mass = 0.0;
    for (std::size_t i : cluster.inner) {
        const double c = std::cos(state_at_t0.phases[i]);
        min_cos = std::min(min_cos, c);
        mass += 1.0 + c;
    }
    mass /= static_cast<double>(n);
    const double member_margin =
        cluster.inner.empty() ? -std::numeric_limits<double>::infinity() : min_cos - x;
    const double mass_margin = mass - 2.0 * rho / (1.0 + std::fabs(x));

    CertificateReport c;
    c.name = "partial-death";
    c.anchor = "cluster-trap-criterion";
    c.margin = std::min({pin_margin, member_margin, mass_margin});
    c.lhs = -c.margin;
    c.rhs = 0.0;
    c.satisfied = pin_margin >= 0.0 && member_margin >= 0.0 && mass_margin > 0.0;
    return c;
}

CondensationResult condensation_bound(const EnsembleState& state_at_m, double mu) {
    const double r = order_parameter(state_at_m);
    if (!(mu > 0.0) || mu > 0.5 * r) {
        throw std::invalid_argument("condensation_bound: mu must lie in (0, R/2]");
    }
    CondensationResult result;
    const double level = -1.0 + mu;
    double mass = 0.0;
    for (std::size_t i = 0; i < state_at_m.phases.size(); ++i) {
        const double c = std::cos(state_at_m.phases[i]);
        if (c >= level) {
            result.cluster.push_back(i);
            mass += 1.0 + c;
        }
    }
    result.mass = mass / static_cast<double>(state_at_m.phases.size());
    result.floor = 2.0 * (r - mu) / (2.0 - mu);
    result.satisfied = result.mass >= result.floor;
    return result;
}

double condensation_mu_preset(double r0) {
    if (!(r0 > 0.0) || !(r0 <= 2.0)) {
        throw std::invalid_argument("condensation_mu_preset: r0 must lie in (0, 2]");
    }
    return (3.0 + r0 - std::sqrt(r0 * r0 - 2.0 * r0 + 9.0)) / 4.0;
}

double speed_limit_bound(double t, const ModelParameters& params, std::size_t i,
                         double omega0_i) {
    params.validate();
    if (i >= params.size()) throw std::invalid_argument("speed_limit_bound: index out of range");
    if (!(t >= 0.0)) throw std::invalid_argument("speed_limit_bound: t must be >= 0");
    const double drive = std::fabs(params.natural_frequencies[i]) + 2.0 * params.coupling;
    if (params.inertia == 0.0) return drive;
    const double decay = std::exp(-t / params.inertia);
    return std::fabs(omega0_i) * decay + drive * (1.0 - decay);
}

CertificateReport order_lowering_residual(const Trajectory& traj,
                                          std::span<const std::size_t> cluster, double slack) {
    const ModelParameters& params = traj.params;
    const double m = params.inertia;
    if (!(m > 0.0)) throw std::domain_error("order_lowering_residual: needs inertia > 0");
    if (traj.size() < 1 || traj.front().velocities.size() != params.size()) {
        throw std::invalid_argument("order_lowering_residual: needs a second-order trajectory");
    }
    std::vector<std::size_t> full;
    if (cluster.empty()) {
        full.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) full[i] = i;
        cluster = full;
    } else {
        for (std::size_t i : cluster) {
            if (i >= params.size()) {
                throw std::invalid_argument("order_lowering_residual: cluster index out of range");
            }
        }
    }
    const double n = static_cast<double>(params.size());
    const double nb = static_cast<double>(cluster.size());
    const double w_b = sup_abs_at(traj.front().velocities, cluster);
    const double mf_b = sup_abs_at(params.natural_frequencies, cluster) + 2.0 * params.coupling;
    const double kappa = params.coupling;
    const double t0 = traj.front().time;
    const std::vector<double>& om0 = traj.front().velocities;

    double worst = -std::numeric_limits<double>::infinity();
    for (const EnsembleState& s : traj.samples) {
        if (s.velocities.size() != params.size()) {
            throw std::invalid_argument("order_lowering_residual: sample without velocities");
        }
        const double t = s.time - t0;
        const double decay = std::exp(-t / m);
        const double ramp = -std::expm1(-t / m);
        const double r_b = order_parameter(s, cluster);
        const double bound =
            2.0 * kappa * ramp *
            ((nb / n) * (w_b * t * decay + m * mf_b * ramp * ramp) + (n - nb) / n);
        for (std::size_t i : cluster) {
            const double residual =
                std::fabs(s.velocities[i] - om0[i] * decay - params.natural_frequencies[i] * ramp +
                          kappa * r_b * std::sin(s.phases[i]) * ramp);
            worst = std::max(worst, residual - bound);
        }
    }
    CertificateReport c;
    c.name = "order-lowering";
    c.anchor = "velocity-reduction-defect";
    c.lhs = worst;
    c.rhs = slack;
    c.satisfied = worst <= slack;
    c.margin = slack - worst;
    return c;
}

}  // namespace winfree
