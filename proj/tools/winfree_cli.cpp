#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "winfree/equilibrium.hpp"
#include "winfree/harness.hpp"
#include "winfree/kuramoto.hpp"
#include "winfree/rng.hpp"
#include "winfree/tikhonov.hpp"

namespace {

void print_certificate(const winfree::CertificateReport& c) {
    std::printf("[%s] %-28s lhs=%.12g rhs=%.12g margin=%.12g\n", c.satisfied ? "PASS" : "FAIL",
                c.name.c_str(), c.lhs, c.rhs, c.margin);
}

void print_summary(const winfree::RunReport& report) {
    const winfree::RunSummary& s = report.summary;
    std::printf("seed=%llu R0=%.12g inf_R=%.12g R_end=%.12g died=%s",
                static_cast<unsigned long long>(s.seed), s.r0, s.inf_r, s.r_end,
                s.died ? "true" : "false");
    if (s.settle_time) std::printf(" settle_time=%.12g", *s.settle_time);
    std::printf(" accepted=%zu rejected=%zu\n", report.trajectory.accepted_steps,
                report.trajectory.rejected_steps);
}

void print_theorem(const winfree::TheoremSummary& s) {
    std::printf("seed=%llu n=%zu horizon=%.12g R0=%.12g target=%.12g inf_R=%.12g R_end=%.12g\n",
                static_cast<unsigned long long>(s.seed), s.n, s.horizon, s.r0, s.target, s.inf_r,
                s.r_end);
    std::printf("hypotheses=%s died=%s conclusion=%s\n", s.hypotheses_ok ? "pass" : "fail",
                s.died ? "true" : "false", s.conclusion_ok ? "pass" : "fail");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for inertial pulse-coupled oscillators"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed_override;
    std::size_t workers = 0;
    double tol = 1e-6;
    double alpha = 2.0;
    std::uint64_t seed = 1;
    std::size_t n = 8;
    double horizon = 500.0;
    double theta0_sup = 2.5;
    double epsilon = 0.2;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "scenario config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
    };

    auto* simulate = app.add_subcommand("simulate", "integrate a scenario and report its summary");
    add_config(simulate);
    simulate->add_option("--out", out_path, "directory for trajectory/certificate/summary CSVs");

    auto* certify = app.add_subcommand(
        "certify", "integrate a scenario and evaluate the standing certificates");
    add_config(certify);
    certify->add_option("--out", out_path, "directory for trajectory/certificate/summary CSVs");

    auto* embed = app.add_subcommand(
        "embed-check", "re-run the scenario through the mean-field sine embedding and compare");
    add_config(embed);
    embed->add_option("--tol", tol, "largest allowed trajectory deviation");

    auto* tikhonov = app.add_subcommand(
        "tikhonov-check", "compare the inertial run against its first-order limit");
    add_config(tikhonov);
    tikhonov->add_option("--out", out_path, "directory for the gap CSV");

    auto* equilibrium = app.add_subcommand(
        "equilibrium", "frozen-state existence check and solver for the scenario's frequencies");
    add_config(equilibrium);
    equilibrium->add_option("--alpha", alpha, "arc half-width, must exceed pi/3");

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and emit one row per run");
    add_config(sweep);
    sweep->add_option("--out", out_path, "CSV file (stdout when omitted)");
    sweep->add_option("--workers", workers, "override the config worker count");

    auto* thm1 = app.add_subcommand(
        "reproduce-thm1", "full-death scenario drawn at 90% of the activity-scaled budgets");
    thm1->add_option("--seed", seed, "base seed");
    thm1->add_option("--n", n, "ensemble size");
    thm1->add_option("--horizon", horizon, "integration horizon");

    auto* thm2 = app.add_subcommand(
        "reproduce-thm2", "majority-cluster scenario with automatically built budgets");
    thm2->add_option("--seed", seed, "base seed");
    thm2->add_option("--n", n, "ensemble size");
    thm2->add_option("--theta0", theta0_sup, "sup-norm of the initial phases");
    thm2->add_option("--epsilon", epsilon, "activity shortfall target, in (0, 1)");
    thm2->add_option("--horizon", horizon, "integration horizon, <= 0 picks one automatically");

    int rc = 0;

    auto load = [&]() {
        winfree::ScenarioConfig config = winfree::load_scenario_config(config_path);
        if (seed_override) config.seed = *seed_override;
        return config;
    };

    simulate->callback([&] {
        const winfree::ScenarioConfig config = load();
        const winfree::RunReport report = winfree::run_scenario(config);
        print_summary(report);
        if (!out_path.empty()) winfree::write_run_outputs(report, config, out_path);
    });

    certify->callback([&] {
        const winfree::ScenarioConfig config = load();
        const winfree::RunReport report = winfree::run_scenario(config);
        for (const winfree::CertificateReport& c : report.certificates) {
            print_certificate(c);
            if (!c.satisfied) rc = 1;
        }
        print_summary(report);
        if (!out_path.empty()) winfree::write_run_outputs(report, config, out_path);
    });

    embed->callback([&] {
        const winfree::ScenarioConfig config = load();
        const winfree::ScenarioInstance inst = winfree::materialize(config);
        const winfree::Trajectory base =
            inst.params.inertia > 0.0
                ? winfree::integrate_second_order(inst.initial, inst.params, config.t_end,
                                                  config.integrator)
                : winfree::integrate_first_order(inst.initial, inst.params, config.t_end,
                                                 config.integrator);
        const winfree::EmbeddedState lifted = winfree::embed(inst.initial, inst.params);
        const winfree::Trajectory mirror = winfree::integrate_kuramoto(
            lifted.phases, lifted.velocities, lifted.system, config.t_end, config.integrator);
        const double deviation = winfree::verify_embedding(base, mirror);
        const bool ok = deviation <= tol;
        std::printf("[%s] embedding deviation=%.12g tol=%.12g\n", ok ? "PASS" : "FAIL", deviation,
                    tol);
        if (!ok) rc = 1;
    });

    tikhonov->callback([&] {
        const winfree::ScenarioConfig config = load();
        const winfree::ScenarioInstance inst = winfree::materialize(config);
        const winfree::GapReport gaps = winfree::compare_trajectories(
            inst.initial, inst.params, config.t_end, config.integrator);
        std::printf("[%s] phase gaps within bound, sup=%.12g\n",
                    gaps.phase_satisfied ? "PASS" : "FAIL", gaps.sup_phase_gap());
        std::printf("[%s] velocity gaps within bound past the relaxation layer\n",
                    gaps.velocity_satisfied ? "PASS" : "FAIL");
        if (!out_path.empty()) {
            std::filesystem::create_directories(out_path);
            std::ofstream os(std::filesystem::path(out_path) / (config.label + "_gaps.csv"),
                             std::ios::binary);
            if (!os) throw std::runtime_error("cannot open gap CSV for writing");
            os << "# generator=" << winfree::kGeneratorName << " seed=" << config.seed << "\n";
            winfree::write_gap_csv(gaps, os);
        }
        if (!gaps.phase_satisfied || !gaps.velocity_satisfied) rc = 1;
    });

    equilibrium->callback([&] {
        const winfree::ScenarioConfig config = load();
        const winfree::ScenarioInstance inst = winfree::materialize(config);
        const winfree::AlphaPair pair = winfree::alpha_infinity(alpha);
        std::printf("alpha=%.12g alpha_inf=%.12g response=%.12g\n", pair.alpha, pair.alpha_inf,
                    winfree::equilibrium_response(pair.alpha));
        const winfree::CertificateReport exists =
            winfree::equilibrium_exists(inst.params, alpha);
        print_certificate(exists);
        if (!exists.satisfied) {
            rc = 1;
            return;
        }
        std::printf("entrance_time<=%.12g rate=%.12g\n",
                    winfree::entrance_time_bound(inst.params, alpha),
                    winfree::exponential_rate(pair, inst.params.coupling));
        const winfree::EnsembleState state = winfree::find_equilibrium(inst.params, alpha);
        std::printf("equilibrium R=%.12g\n", winfree::order_parameter(state));
    });

    sweep->callback([&] {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("config: cannot open " + config_path);
        winfree::SweepSpec spec = winfree::parse_sweep_spec(in);
        if (seed_override) spec.base.seed = *seed_override;
        if (workers > 0) spec.workers = workers;
        const std::vector<winfree::SweepRow> rows = winfree::run_sweep(spec);
        if (out_path.empty()) {
            winfree::write_sweep_csv(spec, rows, std::cout);
        } else {
            std::ofstream os(out_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open sweep CSV for writing");
            winfree::write_sweep_csv(spec, rows, os);
        }
        for (const winfree::SweepRow& row : rows) {
            if (row.failed) rc = 1;
        }
    });

    thm1->callback([&] {
        const winfree::TheoremSummary s = winfree::reproduce_theorem1(seed, n, horizon);
        print_theorem(s);
        std::printf("[%s] full death with activity floor R0/4\n",
                    s.hypotheses_ok && s.conclusion_ok ? "PASS" : "FAIL");
        if (!(s.hypotheses_ok && s.conclusion_ok)) rc = 1;
    });

    thm2->callback([&] {
        if (thm2->count("--horizon") == 0) horizon = 0.0;
        const winfree::TheoremSummary s =
            winfree::reproduce_theorem2(seed, n, theta0_sup, epsilon, horizon);
        print_theorem(s);
        std::printf("[%s] death inside the majority cluster, R_end above target\n",
                    s.hypotheses_ok && s.conclusion_ok ? "PASS" : "FAIL");
        if (!(s.hypotheses_ok && s.conclusion_ok)) rc = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
    return rc;
}
