#include "winfree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "winfree/rng.hpp"

namespace winfree {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for '" + key + "': " + value);
    }
}

SamplerSpec parse_sampler(const std::string& key, const std::string& value) {
    const std::vector<std::string> tokens = tokenize(value);
    if (tokens.empty()) throw std::invalid_argument("config: empty sampler for '" + key + "'");
    SamplerSpec spec;
    if (tokens[0] == "zero") {
        if (tokens.size() != 1) throw std::invalid_argument("config: 'zero' takes no arguments");
        spec.kind = SamplerSpec::Kind::zero;
    } else if (tokens[0] == "uniform") {
        if (tokens.size() != 3) {
            throw std::invalid_argument("config: 'uniform' needs two bounds for '" + key + "'");
        }
        spec.kind = SamplerSpec::Kind::uniform;
        spec.lo = parse_double(key, tokens[1]);
        spec.hi = parse_double(key, tokens[2]);
        if (!(spec.lo <= spec.hi)) {
            throw std::invalid_argument("config: uniform bounds out of order for '" + key + "'");
        }
    } else if (tokens[0] == "list") {
        spec.kind = SamplerSpec::Kind::list;
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            spec.values.push_back(parse_double(key, tokens[i]));
        }
        if (spec.values.empty()) {
            throw std::invalid_argument("config: 'list' needs values for '" + key + "'");
        }
    } else {
        throw std::invalid_argument("config: unknown sampler '" + tokens[0] + "' for '" + key + "'");
    }
    return spec;
}

struct ParsedFile {
    ScenarioConfig config;
    std::vector<SweepAxis> axes;
    std::size_t replicates = 1;
    std::size_t workers = 1;
};

ParsedFile parse_file(std::istream& in) {
    ParsedFile out;
    ScenarioConfig& cfg = out.config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is missing key or value");
        }
        if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "n") {
            cfg.n_oscillators = static_cast<std::size_t>(std::stoull(value));
        } else if (key == "kappa") {
            cfg.kappa = parse_double(key, value);
        } else if (key == "m") {
            cfg.inertia = parse_double(key, value);
        } else if (key == "t_end") {
            cfg.t_end = parse_double(key, value);
        } else if (key == "phases") {
            cfg.phases = parse_sampler(key, value);
        } else if (key == "velocities") {
            cfg.velocities = parse_sampler(key, value);
        } else if (key == "frequencies") {
            cfg.frequencies = parse_sampler(key, value);
        } else if (key == "nu_sup") {
            cfg.nu_sup = parse_double(key, value);
        } else if (key == "omega_sup") {
            cfg.omega_sup = parse_double(key, value);
        } else if (key == "mode") {
            if (value == "derived") {
                cfg.derived = true;
            } else if (value == "explicit") {
                cfg.derived = false;
            } else {
                throw std::invalid_argument("config: mode must be 'explicit' or 'derived'");
            }
        } else if (key == "a") {
            cfg.constants.a = parse_double(key, value);
        } else if (key == "b") {
            cfg.constants.b = parse_double(key, value);
        } else if (key == "c") {
            cfg.constants.c = parse_double(key, value);
        } else if (key == "margin") {
            cfg.margin = parse_double(key, value);
        } else if (key == "method") {
            if (value == "exponential-split") {
                cfg.integrator.method = Method::exponential_split;
            } else if (value == "adaptive-rk") {
                cfg.integrator.method = Method::adaptive_rk;
            } else {
                throw std::invalid_argument("config: unknown method '" + value + "'");
            }
        } else if (key == "rel_tol") {
            cfg.integrator.rel_tolerance = parse_double(key, value);
        } else if (key == "abs_tol") {
            cfg.integrator.abs_tolerance = parse_double(key, value);
        } else if (key == "max_step") {
            cfg.integrator.max_step = parse_double(key, value);
        } else if (key == "initial_step") {
            cfg.integrator.initial_step = parse_double(key, value);
        } else if (key == "sample_interval") {
            cfg.integrator.sample_interval = parse_double(key, value);
        } else if (key == "velocity_tol") {
            cfg.velocity_tol = parse_double(key, value);
        } else if (key == "death_window") {
            cfg.death_window = parse_double(key, value);
        } else if (key == "label") {
            cfg.label = value;
        } else if (key == "replicates") {
            out.replicates = static_cast<std::size_t>(std::stoull(value));
        } else if (key == "workers") {
            out.workers = static_cast<std::size_t>(std::stoull(value));
        } else if (key.rfind("axis.", 0) == 0) {
            SweepAxis axis;
            axis.name = key.substr(5);
            for (const std::string& tok : tokenize(value)) {
                axis.values.push_back(parse_double(key, tok));
            }
            if (axis.values.empty()) {
                throw std::invalid_argument("config: axis '" + axis.name + "' has no values");
            }
            out.axes.push_back(std::move(axis));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return out;
}

std::vector<double> draw(const SamplerSpec& spec, std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n, 0.0);
    switch (spec.kind) {
        case SamplerSpec::Kind::zero:
            break;
        case SamplerSpec::Kind::uniform: {
            SplitMix64 gen(seed);
            for (double& x : v) x = gen.uniform(spec.lo, spec.hi);
            break;
        }
        case SamplerSpec::Kind::list:
            if (spec.values.size() != n) {
                throw std::invalid_argument("config: list sampler length does not match n");
            }
            v = spec.values;
            break;
    }
    return v;
}

double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::fabs(x));
    return s;
}

// scale so max|v_i| == target; an all-zero vector stays zero
void rescale_sup(std::vector<double>& v, double target) {
    if (!(target >= 0.0)) throw std::invalid_argument("config: sup target must be >= 0");
    const double sup = sup_abs(v);
    if (target == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    if (sup == 0.0) return;
    const double f = target / sup;
    for (double& x : v) x *= f;
}

std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_seed_header(std::ostream& os, std::uint64_t seed) {
    os << "# generator=" << kGeneratorName << " seed=" << seed << "\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + path.string());
    return os;
}

}  // namespace

void ScenarioConfig::validate() const {
    if (n_oscillators == 0) throw std::invalid_argument("config: n must be >= 1");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("config: kappa must be finite and >= 0");
    }
    if (!(inertia >= 0.0) || !std::isfinite(inertia)) {
        throw std::invalid_argument("config: m must be finite and >= 0");
    }
    if (!(t_end > 0.0)) throw std::invalid_argument("config: t_end must be > 0");
    if (derived) {
        if (!(margin > 0.0) || !(margin < 1.0)) {
            throw std::invalid_argument("config: derived mode needs margin in (0, 1)");
        }
        if (!(constants.a > 0.0) || !(constants.b > 0.0) || !(constants.c > 0.0)) {
            throw std::invalid_argument("config: derived mode needs positive budget constants");
        }
        if (!(kappa > 0.0)) throw std::invalid_argument("config: derived mode needs kappa > 0");
    }
    if (!(velocity_tol > 0.0)) throw std::invalid_argument("config: velocity_tol must be > 0");
    if (death_window < 0.0 || death_window >= t_end) {
        throw std::invalid_argument("config: death_window must lie in [0, t_end)");
    }
    integrator.validate(t_end);
}

ScenarioConfig parse_scenario_config(std::istream& in) { return parse_file(in).config; }

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    return parse_scenario_config(in);
}

ScenarioInstance materialize(const ScenarioConfig& config) {
    config.validate();
    const std::size_t n = config.n_oscillators;

    ScenarioInstance inst;
    inst.initial.time = 0.0;
    // independent child streams keep each vector stable under overrides
    inst.initial.phases = draw(config.phases, n, mix_seed(config.seed, 1));
    std::vector<double> velocities = draw(config.velocities, n, mix_seed(config.seed, 2));
    std::vector<double> frequencies = draw(config.frequencies, n, mix_seed(config.seed, 3));

    inst.r0 = 0.0;
    for (double th : inst.initial.phases) inst.r0 += 1.0 + std::cos(th);
    inst.r0 /= static_cast<double>(n);

    double inertia = config.inertia;
    if (config.derived) {
        const double scale = inst.r0 * std::sqrt(inst.r0);
        rescale_sup(frequencies, config.margin * config.constants.a * config.kappa * scale);
        rescale_sup(velocities, config.margin * config.constants.c * config.kappa * scale);
        inertia = config.margin * config.constants.b * scale / config.kappa;
    } else {
        if (config.nu_sup) rescale_sup(frequencies, *config.nu_sup);
        if (config.omega_sup) rescale_sup(velocities, *config.omega_sup);
    }

    inst.params.natural_frequencies = std::move(frequencies);
    inst.params.coupling = config.kappa;
    inst.params.inertia = inertia;
    if (inertia > 0.0) {
        inst.initial.velocities = std::move(velocities);
    }
    return inst;
}

RunReport run_scenario(const ScenarioConfig& config) {
    RunReport report;
    report.instance = materialize(config);
    const ScenarioInstance& inst = report.instance;

    report.trajectory = inst.params.inertia > 0.0
                            ? integrate_second_order(inst.initial, inst.params, config.t_end,
                                                     config.integrator)
                            : integrate_first_order(inst.initial, inst.params, config.t_end,
                                                    config.integrator);

    // never narrower than the sample spacing, or the window could be empty
    const double window =
        std::max(config.death_window > 0.0 ? config.death_window : 0.1 * config.t_end,
                 config.integrator.sample_interval);
    report.verdict = detect_death(report.trajectory, config.velocity_tol, window);

    report.summary.seed = config.seed;
    report.summary.r0 = inst.r0;
    report.summary.sample_interval = config.integrator.sample_interval;
    report.summary.died = report.verdict.died;
    report.summary.settle_time = report.verdict.settle_time;
    double inf_r = std::numeric_limits<double>::infinity();
    for (const EnsembleState& s : report.trajectory.samples) {
        inf_r = std::min(inf_r, order_parameter(s));
    }
    report.summary.inf_r = inf_r;
    report.summary.r_end = order_parameter(report.trajectory.back());

    if (inst.params.coupling > 0.0) {
        const SmallnessReport sm = smallness_check(inst.initial, inst.params, config.constants);
        for (const CertificateReport& c : sm.conditions) report.certificates.push_back(c);
        const auto margins = theorem1_margins(config.constants);
        report.certificates.push_back(margins.first);
        report.certificates.push_back(margins.second);
        if (inst.params.inertia > 0.0) {
            report.certificates.push_back(initial_layer_check(
                0.5, 1.0, inst.params, sup_abs(inst.initial.velocities), inst.r0));
        }
    }
    return report;
}

void write_run_outputs(const RunReport& report, const ScenarioConfig& config,
                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / (config.label + "_trajectory.csv"));
        write_seed_header(os, config.seed);
        write_trajectory_csv(report.trajectory, os);
    }
    {
        auto os = open_out(out_dir / (config.label + "_certificates.csv"));
        write_seed_header(os, config.seed);
        os << kCertificateCsvHeader << "\n";
        for (const CertificateReport& c : report.certificates) {
            os << certificate_csv_row(c) << "\n";
        }
    }
    {
        auto os = open_out(out_dir / (config.label + "_summary.csv"));
        write_seed_header(os, config.seed);
        os << "seed,r0,inf_R,R_end,died,settle_time,sample_interval\n";
        const RunSummary& s = report.summary;
        os << s.seed << ',' << format(s.r0) << ',' << format(s.inf_r) << ',' << format(s.r_end)
           << ',' << (s.died ? "true" : "false") << ','
           << (s.settle_time ? format(*s.settle_time) : std::string()) << ','
           << format(s.sample_interval) << "\n";
    }
}

TheoremSummary reproduce_theorem1(std::uint64_t seed, std::size_t n, double horizon) {
    ScenarioConfig config;
    config.seed = seed;
    config.n_oscillators = n;
    config.kappa = 1.0;
    config.t_end = horizon;
    config.phases = SamplerSpec{SamplerSpec::Kind::uniform, -std::numbers::pi / 2.0,
                                std::numbers::pi / 2.0, {}};
    config.velocities = SamplerSpec{SamplerSpec::Kind::uniform, -1.0, 1.0, {}};
    config.frequencies = SamplerSpec{SamplerSpec::Kind::uniform, -1.0, 1.0, {}};
    config.derived = true;
    config.constants = SmallnessConstants{1.0 / 50.0, 1.0 / 80.0, 1.0 / 20.0};
    config.margin = 0.9;
    config.integrator.sample_interval = horizon / 1000.0;
    config.label = "theorem1";

    const RunReport report = run_scenario(config);
    TheoremSummary out;
    out.seed = seed;
    out.n = n;
    out.horizon = horizon;
    out.constants = config.constants;
    out.r0 = report.summary.r0;
    out.target = report.summary.r0 / 4.0;
    out.inf_r = report.summary.inf_r;
    out.r_end = report.summary.r_end;
    out.died = report.summary.died;
    out.hypotheses_ok = true;
    for (const CertificateReport& c : report.certificates) {
        out.hypotheses_ok = out.hypotheses_ok && c.satisfied;
    }
    out.conclusion_ok = out.died && out.inf_r >= out.target - 1e-7;
    return out;
}

TheoremSummary reproduce_theorem2(std::uint64_t seed, std::size_t n, double theta0_sup,
                                  double epsilon, double horizon) {
    if (n == 0) throw std::invalid_argument("reproduce: n must be >= 1");
    const double kappa = 1.0;
    const Theorem2Parameters plan = theorem2_parameter_builder(theta0_sup, epsilon, kappa);
    if (horizon <= 0.0) horizon = std::max(500.0, 5.0 * plan.entrance_time);

    SplitMix64 phase_gen(mix_seed(seed, 1));
    SplitMix64 vel_gen(mix_seed(seed, 2));
    SplitMix64 freq_gen(mix_seed(seed, 3));
    EnsembleState initial;
    initial.phases.resize(n);
    for (double& th : initial.phases) th = phase_gen.uniform(-theta0_sup, theta0_sup);
    std::vector<double> velocities(n);
    for (double& w : velocities) w = vel_gen.uniform(-1.0, 1.0);
    std::vector<double> frequencies(n);
    for (double& nu : frequencies) nu = freq_gen.uniform(-1.0, 1.0);
    rescale_sup(velocities, 0.9 * plan.constants.c * kappa);
    rescale_sup(frequencies, 0.9 * plan.constants.a * kappa);
    initial.velocities = std::move(velocities);

    ModelParameters params;
    params.natural_frequencies = std::move(frequencies);
    params.coupling = kappa;
    params.inertia = 0.9 * plan.constants.b / kappa;

    IntegratorOptions options;
    options.sample_interval = horizon / 1000.0;
    Trajectory traj = integrate_second_order(initial, params, horizon, options);
    const DeathVerdict verdict = detect_death(traj, 1e-6, 0.1 * horizon);

    TheoremSummary out;
    out.seed = seed;
    out.n = n;
    out.horizon = horizon;
    out.constants = plan.constants;
    out.r0 = order_parameter(traj.front());
    out.target = 2.0 - epsilon;
    double inf_r = std::numeric_limits<double>::infinity();
    for (const EnsembleState& s : traj.samples) inf_r = std::min(inf_r, order_parameter(s));
    out.inf_r = inf_r;
    out.r_end = order_parameter(traj.back());
    out.died = verdict.died;
    out.hypotheses_ok = theta0_sup < plan.alpha &&
                        sup_abs(params.natural_frequencies) / kappa < plan.constants.a &&
                        params.inertia * kappa < plan.constants.b &&
                        sup_abs(initial.velocities) / kappa < plan.constants.c;
    out.conclusion_ok = out.died && out.r_end > out.target;
    return out;
}

SweepSpec parse_sweep_spec(std::istream& in) {
    ParsedFile parsed = parse_file(in);
    SweepSpec spec;
    spec.base = std::move(parsed.config);
    spec.axes = std::move(parsed.axes);
    spec.replicates = parsed.replicates == 0 ? 1 : parsed.replicates;
    spec.workers = parsed.workers == 0 ? 1 : parsed.workers;
    return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    return parse_sweep_spec(in);
}

namespace {

void apply_axis(ScenarioConfig& config, const std::string& name, double value) {
    const bool derived_target = name == "m" || name == "m_kappa" || name == "nu_over_kappa" ||
                                name == "omega_over_kappa";
    if (config.derived && derived_target) {
        throw std::invalid_argument("sweep: axis '" + name + "' conflicts with derived mode");
    }
    if (name == "m") {
        config.inertia = value;
    } else if (name == "kappa") {
        config.kappa = value;
    } else if (name == "m_kappa") {
        if (!(config.kappa > 0.0)) throw std::invalid_argument("sweep: m_kappa needs kappa > 0");
        config.inertia = value / config.kappa;
    } else if (name == "nu_over_kappa") {
        config.nu_sup = value * config.kappa;
    } else if (name == "omega_over_kappa") {
        config.omega_sup = value * config.kappa;
    } else if (name == "t_end") {
        config.t_end = value;
    } else {
        throw std::invalid_argument("sweep: unknown axis '" + name + "'");
    }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    std::size_t cells = 1;
    for (const SweepAxis& axis : spec.axes) cells *= axis.values.size();
    const std::size_t replicates = std::max<std::size_t>(1, spec.replicates);
    const std::size_t jobs = cells * replicates;
    std::vector<SweepRow> rows(jobs);

    auto run_job = [&](std::size_t j) {
        const std::size_t cell = j / replicates;
        const std::size_t rep = j % replicates;
        SweepRow& row = rows[j];
        row.replicate = rep;
        row.seed = mix_seed(mix_seed(spec.base.seed, cell), rep);

        ScenarioConfig config = spec.base;
        config.seed = row.seed;
        std::size_t rest = cell;
        // row-major: the last axis varies fastest
        row.axis_values.resize(spec.axes.size());
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const SweepAxis& axis = spec.axes[a];
            const std::size_t idx = rest % axis.values.size();
            rest /= axis.values.size();
            row.axis_values[a] = axis.values[idx];
        }
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
            apply_axis(config, spec.axes[a].name, row.axis_values[a]);
        }
        try {
            const RunReport report = run_scenario(config);
            row.died = report.summary.died;
            row.inf_r = report.summary.inf_r;
            row.r_end = report.summary.r_end;
        } catch (const IntegrationError&) {
            row.failed = true;
            row.inf_r = std::numeric_limits<double>::quiet_NaN();
            row.r_end = std::numeric_limits<double>::quiet_NaN();
        } catch (const SolverError&) {
            row.failed = true;
            row.inf_r = std::numeric_limits<double>::quiet_NaN();
            row.r_end = std::numeric_limits<double>::quiet_NaN();
        }
    };

    const std::size_t workers = std::min(std::max<std::size_t>(1, spec.workers), jobs);
    if (workers <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) run_job(j);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= jobs) return;
                try {
                    run_job(j);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& os) {
    write_seed_header(os, spec.base.seed);
    std::string header;
    for (const SweepAxis& axis : spec.axes) {
        header += axis.name;
        header += ',';
    }
    header += "replicate,seed,died,inf_R,R_end,failed";
    os << header << "\n";
    for (const SweepRow& row : rows) {
        std::string line;
        for (double v : row.axis_values) {
            line += format(v);
            line += ',';
        }
        line += std::to_string(row.replicate);
        line += ',';
        line += std::to_string(row.seed);
        line += ',';
        line += row.died ? "true" : "false";
        line += ',';
        line += format(row.inf_r);
        line += ',';
        line += format(row.r_end);
        line += ',';
        line += row.failed ? "true" : "false";
        os << line << "\n";
    }
}

}  // namespace winfree
