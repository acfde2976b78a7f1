#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>

#include "winfree/integrate.hpp"
#include "winfree/model.hpp"

namespace winfree {

/// One mechanically checked inequality. margin == rhs - lhs unless noted in
/// the producing operation. anchor is a stable slug naming the condition.
struct CertificateReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double margin = 0.0;
    std::string anchor;
};

inline constexpr const char* kCertificateCsvHeader = "name,lhs,rhs,satisfied,margin,anchor";

std::string certificate_csv_row(const CertificateReport& report);

/// The two closed-form constant checks behind the full-death theorem, for a
/// budget triple (a, b, c). Requires a, b, c > 0.
///  first:  4bc + (2 + 2 sqrt(2) a) e^{-1} sqrt(2) b             <  1/2
///  second: e^{-1} c + a + 4 sqrt(2) e^{-1} b c + 4 b (1 + a sqrt(2))
///          <= (sqrt(3) / (8 sqrt(2))) (1 - e^{-1})
std::pair<CertificateReport, CertificateReport> theorem1_margins(const SmallnessConstants& constants);

/// The three smallness hypotheses relative to R0 = order_parameter(initial):
///   max|nu_i| / kappa < a R0^{3/2},  m kappa < b R0^{3/2},  max|omega0_i| / kappa < c R0^{3/2}.
/// All strict. applicable == false when R0 == 0 (hypotheses void, no throw).
struct SmallnessReport {
    bool applicable = false;
    std::array<CertificateReport, 3> conditions;

    bool all_satisfied() const;
};

SmallnessReport smallness_check(const EnsembleState& initial, const ModelParameters& params,
                                const SmallnessConstants& constants);

/// Entry condition keeping R above delta * R0 throughout the initial layer
/// [0, eta m]:  m w0 (1 - e^{-eta}) + M_F m (eta - 1 + e^{-eta}) < (1 - delta) R0,
/// where w0 = max|omega0_i| and M_F = force_sup_bound.
CertificateReport initial_layer_check(double delta, double eta, const ModelParameters& params,
                                      double omega0_sup, double r0);

/// Squared velocity-to-pinning ratio Q for the outer cluster B = cluster.outer:
///   Q = ( [w_B e^{-eta} + nu_B + 2 kappa ( (|B|/N) m (w_B (eta v 1) e^{-(eta v 1)} + M_{F,B})
///         + (N - |B|)/N )] / (kappa rho (1 - e^{-eta})) )^2
/// with w_B = omega0_cluster_sup and nu_B = max_{i in B} |nu_i|. Phases stay
/// pinned at cos >= x whenever 1 - x^2 >= Q. Requires kappa, rho > 0, eta > 0.
double trapping_threshold(const ClusterSpec& cluster, double eta, double rho,
                          const ModelParameters& params, double omega0_cluster_sup);

/// Partial-death criterion at time t0 = state_at_t0.time (requires t0 >= eta m):
///   [ 1 - x^2 >= Q(outer) ]  and  [ cos theta_i(t0) >= x for all i in inner ]
///   and  [ (1/N) sum_{i in inner} (1 + cos theta_i(t0)) > 2 rho / (1 + |x|) ].
/// When satisfied, the inner activity stays >= rho for t >= t0, inner phases
/// oscillate less than 2 pi and outer ones less than 4 pi afterwards.
/// The report records the worst normalized slack (lhs = -min margin, rhs = 0);
/// omega0 is the velocity vector at time 0, not t0.
CertificateReport pod_check(const EnsembleState& state_at_t0, const ClusterSpec& cluster,
                            double rho, double x, double eta, const ModelParameters& params,
                            std::span<const double> omega0);

/// Cluster of phases near the activity peak at the supplied state:
/// indices { i : cos theta_i >= -1 + mu }, its mass (1/N) sum (1 + cos theta_i),
/// and the guaranteed floor 2 (R - mu) / (2 - mu). Requires mu in (0, R/2].
struct CondensationResult {
    std::vector<std::size_t> cluster;
    double mass = 0.0;
    double floor = 0.0;
    bool satisfied = false;  // mass >= floor
};

CondensationResult condensation_bound(const EnsembleState& state_at_m, double mu);

/// Sharper optional mu choice (3 + R0 - sqrt(R0^2 - 2 R0 + 9)) / 4 for
/// R0 in (0, 1]; always lands in (0, R0/2]. Not used by any certificate.
double condensation_mu_preset(double r0);

/// Pathwise bound |theta_i'(t)| <= |omega0_i| e^{-t/m} + (|nu_i| + 2 kappa)(1 - e^{-t/m}).
/// For m == 0 the bound degenerates to |nu_i| + 2 kappa.
double speed_limit_bound(double t, const ModelParameters& params, std::size_t i, double omega0_i);

/// Residual of the first-order reduction of the velocity along a second-order
/// trajectory, against the two-scale bound with cluster B (default: everyone):
///   | theta_i' - omega0_i e^{-t/m} - nu_i (1 - e^{-t/m}) + kappa R_B(t) sin theta_i (1 - e^{-t/m}) |
///   <= 2 kappa (1 - e^{-t/m}) [ (|B|/N)(w_B t e^{-t/m} + m M_{F,B} (1 - e^{-t/m})^2) + (N - |B|)/N ]
/// Report: lhs = sup over samples and i in B of (residual - bound), rhs = slack.
CertificateReport order_lowering_residual(const Trajectory& traj,
                                          std::span<const std::size_t> cluster = {},
                                          double slack = 1e-7);

}  // namespace winfree
