#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "winfree/certificates.hpp"
#include "winfree/equilibrium.hpp"
#include "winfree/integrate.hpp"
#include "winfree/model.hpp"

namespace winfree {

/// How a vector of reals is drawn: all zeros, i.i.d. uniform on [lo, hi], or
/// verbatim values (then n must match).
struct SamplerSpec {
    enum class Kind { zero, uniform, list };
    Kind kind = Kind::zero;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;
};

/// One simulation scenario, parsed from a flat `key = value` file.
struct ScenarioConfig {
    std::uint64_t seed = 0;
    std::size_t n_oscillators = 0;
    double kappa = 1.0;
    double inertia = 0.0;
    double t_end = 1.0;
    SamplerSpec phases;
    SamplerSpec velocities;
    SamplerSpec frequencies;
    std::optional<double> nu_sup;     // rescale drawn frequencies to this sup
    std::optional<double> omega_sup;  // rescale drawn velocities to this sup

    // derived mode: ignore inertia/nu_sup/omega_sup and derive them from the
    // budget triple at the stated margin of the R0-scaled thresholds
    bool derived = false;
    SmallnessConstants constants{1.0 / 50.0, 1.0 / 80.0, 1.0 / 20.0};
    double margin = 0.9;

    IntegratorOptions integrator;
    double velocity_tol = 1e-6;
    double death_window = 0.0;  // 0 means 10% of t_end
    std::string label = "run";

    void validate() const;
};

ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Fully drawn instance: parameters plus initial state, determined by the seed.
struct ScenarioInstance {
    ModelParameters params;
    EnsembleState initial;
    double r0 = 0.0;
};

ScenarioInstance materialize(const ScenarioConfig& config);

struct RunSummary {
    std::uint64_t seed = 0;
    double r0 = 0.0;
    double inf_r = 0.0;
    double r_end = 0.0;
    bool died = false;
    std::optional<double> settle_time;
    double sample_interval = 0.0;
};

struct RunReport {
    ScenarioInstance instance;
    Trajectory trajectory;
    std::vector<CertificateReport> certificates;
    DeathVerdict verdict;
    RunSummary summary;
};

/// Integrates the scenario and evaluates the standing certificates
/// (smallness, constant margins, initial layer for second-order runs).
RunReport run_scenario(const ScenarioConfig& config);

/// Writes <label>_trajectory.csv, <label>_certificates.csv, <label>_summary.csv
/// under out_dir; every file opens with a `# generator=...,seed=...` line.
void write_run_outputs(const RunReport& report, const ScenarioConfig& config,
                       const std::filesystem::path& out_dir);

struct TheoremSummary {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double horizon = 0.0;
    double r0 = 0.0;
    double target = 0.0;  // activity floor the conclusion must clear
    double inf_r = 0.0;
    double r_end = 0.0;
    bool hypotheses_ok = false;
    bool died = false;
    bool conclusion_ok = false;
    SmallnessConstants constants;
};

/// Full-death reproduction: phases uniform on (-pi/2, pi/2)^N, kappa = 1,
/// frequencies / inertia / velocities drawn at 90% of their R0-scaled budget
/// with constants (1/50, 1/80, 1/20). Conclusion: died and
/// min-over-samples R >= R0/4 - 1e-7.
TheoremSummary reproduce_theorem1(std::uint64_t seed, std::size_t n, double horizon);

/// Majority-cluster reproduction: phases uniform on (-theta0_sup, theta0_sup)^N,
/// kappa = 1, budget triple from theorem2_parameter_builder(theta0_sup, epsilon),
/// data at 90% of the unscaled budget. horizon <= 0 selects
/// max(500, 5 * entrance_time). Conclusion: died and R(horizon) > 2 - epsilon.
TheoremSummary reproduce_theorem2(std::uint64_t seed, std::size_t n, double theta0_sup,
                                  double epsilon, double horizon);

struct SweepAxis {
    std::string name;  // m_kappa | nu_over_kappa | omega_over_kappa | kappa | m | t_end
    std::vector<double> values;
};

struct SweepSpec {
    ScenarioConfig base;
    std::vector<SweepAxis> axes;
    std::size_t replicates = 1;
    std::size_t workers = 1;
};

SweepSpec parse_sweep_spec(std::istream& in);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct SweepRow {
    std::vector<double> axis_values;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    bool failed = false;  // integration/solver error captured, batch continues
    bool died = false;
    double inf_r = 0.0;
    double r_end = 0.0;
};

/// Row-major grid over the axes, `replicates` runs per cell. Cell seeds are
/// derived from (base seed, cell index, replicate), so the table is a pure
/// function of the spec no matter how many workers execute it.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& os);

}  // namespace winfree
