#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "winfree/harness.hpp"
#include "winfree/model.hpp"
#include "winfree/rng.hpp"

using namespace winfree;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario_config(in);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream in(line);
    while (std::getline(in, tok, sep)) out.push_back(tok);
    return out;
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / ("winfree_harness_" + leaf);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("seeded generator is the published counter sequence") {
    CHECK(std::string(kGeneratorName) == "splitmix64");
    SplitMix64 zero(0);
    CHECK(zero.next() == 16294208416658607535ull);
    CHECK(zero.next() == 7960286522194355700ull);
    CHECK(zero.next() == 487617019471545679ull);
    SplitMix64 other(1234567);
    CHECK(other.next() == 6457827717110365317ull);

    SplitMix64 unit(99);
    for (int i = 0; i < 1000; ++i) {
        const double u = unit.uniform(-2.0, 3.0);
        CHECK(u >= -2.0);
        CHECK(u < 3.0);
    }
    CHECK(mix_seed(7, 1) != mix_seed(7, 2));
    CHECK(mix_seed(7, 1) != mix_seed(8, 1));
}

TEST_CASE("scenario files parse field by field") {
    const ScenarioConfig cfg = parse(
        "# full scenario\n"
        "seed = 42\n"
        "n = 3\n"
        "kappa = 0.5   # coupling\n"
        "m = 0.125\n"
        "t_end = 7.5\n"
        "phases = uniform -1.0 1.0\n"
        "velocities = zero\n"
        "frequencies = list 0.1 -0.2 0.3\n"
        "nu_sup = 0.25\n"
        "omega_sup = 0\n"
        "mode = explicit\n"
        "method = adaptive-rk\n"
        "rel_tol = 1e-9\n"
        "abs_tol = 1e-11\n"
        "max_step = 0.5\n"
        "initial_step = 1e-3\n"
        "sample_interval = 0.25\n"
        "velocity_tol = 1e-7\n"
        "death_window = 1.5\n"
        "label = demo\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.n_oscillators == 3);
    CHECK(cfg.kappa == 0.5);
    CHECK(cfg.inertia == 0.125);
    CHECK(cfg.t_end == 7.5);
    CHECK(cfg.phases.kind == SamplerSpec::Kind::uniform);
    CHECK(cfg.phases.lo == -1.0);
    CHECK(cfg.phases.hi == 1.0);
    CHECK(cfg.velocities.kind == SamplerSpec::Kind::zero);
    CHECK(cfg.frequencies.kind == SamplerSpec::Kind::list);
    CHECK(cfg.frequencies.values == std::vector<double>{0.1, -0.2, 0.3});
    REQUIRE(cfg.nu_sup.has_value());
    CHECK(*cfg.nu_sup == 0.25);
    REQUIRE(cfg.omega_sup.has_value());
    CHECK(*cfg.omega_sup == 0.0);
    CHECK_FALSE(cfg.derived);
    CHECK(cfg.integrator.method == Method::adaptive_rk);
    CHECK(cfg.integrator.rel_tolerance == 1e-9);
    CHECK(cfg.integrator.abs_tolerance == 1e-11);
    CHECK(cfg.integrator.max_step == 0.5);
    CHECK(cfg.integrator.initial_step == 1e-3);
    CHECK(cfg.integrator.sample_interval == 0.25);
    CHECK(cfg.velocity_tol == 1e-7);
    CHECK(cfg.death_window == 1.5);
    CHECK(cfg.label == "demo");

    const ScenarioConfig derived = parse(
        "seed = 1\nn = 2\nmode = derived\nmargin = 0.8\n"
        "a = 0.01\nb = 0.005\nc = 0.02\nphases = zero\n");
    CHECK(derived.derived);
    CHECK(derived.margin == 0.8);
    CHECK(derived.constants.a == 0.01);
    CHECK(derived.constants.b == 0.005);
    CHECK(derived.constants.c == 0.02);
}

TEST_CASE("malformed scenario files are rejected") {
    CHECK_THROWS_AS((void)parse("this line has no equals\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("zeta = 1\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("kappa =\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("kappa = abc\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("kappa = 1.0x\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("phases = uniform 1\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("phases = uniform 2 1\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("phases = zero 1\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("phases = list\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("phases = gauss 0 1\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("mode = auto\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)parse("method = euler\n"), const std::invalid_argument&);
    CHECK_THROWS_AS((void)load_scenario_config("/nonexistent/winfree.cfg"),
                    const std::invalid_argument&);
}

TEST_CASE("scenario validation") {
    ScenarioConfig cfg = parse("seed = 1\nn = 2\nkappa = 1\nt_end = 1\nphases = zero\n");
    CHECK_NOTHROW(cfg.validate());

    ScenarioConfig bad = cfg;
    bad.n_oscillators = 0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad = cfg;
    bad.kappa = -1.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad = cfg;
    bad.inertia = -0.5;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad = cfg;
    bad.t_end = 0.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad = cfg;
    bad.velocity_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad = cfg;
    bad.death_window = 1.0;  // must be < t_end
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);

    bad = cfg;
    bad.derived = true;
    bad.margin = 1.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad.margin = 0.9;
    bad.constants.b = 0.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
    bad.constants.b = 0.0125;
    bad.kappa = 0.0;
    CHECK_THROWS_AS(bad.validate(), const std::invalid_argument&);
}

TEST_CASE("materialization is a pure function of the seed") {
    const std::string text =
        "seed = 11\nn = 4\nkappa = 1\nm = 0.1\nt_end = 1\n"
        "phases = uniform -1 1\nvelocities = uniform -1 1\nfrequencies = uniform -1 1\n";
    const ScenarioInstance a = materialize(parse(text));
    const ScenarioInstance b = materialize(parse(text));
    CHECK(a.initial.phases == b.initial.phases);
    CHECK(a.initial.velocities == b.initial.velocities);
    CHECK(a.params.natural_frequencies == b.params.natural_frequencies);
    CHECK(a.r0 == b.r0);

    // each vector comes from its own child stream, so editing one sampler
    // leaves the other draws untouched
    ScenarioConfig quiet = parse(text);
    quiet.frequencies = SamplerSpec{};  // zero
    const ScenarioInstance c = materialize(quiet);
    CHECK(c.initial.phases == a.initial.phases);
    CHECK(c.initial.velocities == a.initial.velocities);
    for (double nu : c.params.natural_frequencies) CHECK(nu == 0.0);

    ScenarioConfig reseeded = parse(text);
    reseeded.seed = 12;
    CHECK(materialize(reseeded).initial.phases != a.initial.phases);

    double r0 = 0.0;
    for (double th : a.initial.phases) r0 += 1.0 + std::cos(th);
    CHECK(a.r0 == doctest::Approx(r0 / 4.0).epsilon(1e-15));
}

TEST_CASE("materialization scales data to the requested envelopes") {
    SUBCASE("explicit sup overrides") {
        ScenarioConfig cfg = parse(
            "seed = 3\nn = 2\nkappa = 1\nm = 0\nt_end = 1\n"
            "phases = zero\nfrequencies = list 3 -1\nnu_sup = 0.5\n");
        const ScenarioInstance inst = materialize(cfg);
        CHECK(inst.params.natural_frequencies[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(inst.params.natural_frequencies[1] ==
              doctest::Approx(-0.5 / 3.0).epsilon(1e-15));

        cfg.omega_sup = 0.7;  // velocities stay zero: nothing to scale
        cfg.inertia = 0.1;
        const ScenarioInstance with_m = materialize(cfg);
        REQUIRE(with_m.initial.velocities.size() == 2);
        CHECK(with_m.initial.velocities[0] == 0.0);
        CHECK(with_m.initial.velocities[1] == 0.0);
    }

    SUBCASE("first-order scenarios carry no velocity state") {
        const ScenarioConfig cfg = parse(
            "seed = 3\nn = 2\nkappa = 1\nm = 0\nt_end = 1\n"
            "phases = zero\nvelocities = uniform -1 1\n");
        CHECK(materialize(cfg).initial.velocities.empty());
    }

    SUBCASE("list length must match n") {
        const ScenarioConfig cfg = parse(
            "seed = 3\nn = 3\nkappa = 1\nt_end = 1\nphases = list 0 0\n");
        CHECK_THROWS_AS((void)materialize(cfg), const std::invalid_argument&);
    }

    SUBCASE("derived mode lands exactly on the margin of each budget") {
        const ScenarioConfig cfg = parse(
            "seed = 5\nn = 3\nkappa = 2\nt_end = 1\nmode = derived\nmargin = 0.9\n"
            "phases = list 0.5 -0.25 1.0\n"
            "velocities = uniform -1 1\nfrequencies = uniform -1 1\n");
        const ScenarioInstance inst = materialize(cfg);
        const double scale = inst.r0 * std::sqrt(inst.r0);
        double nu_sup = 0.0, om_sup = 0.0;
        for (double nu : inst.params.natural_frequencies) nu_sup = std::max(nu_sup, std::fabs(nu));
        for (double w : inst.initial.velocities) om_sup = std::max(om_sup, std::fabs(w));
        CHECK(nu_sup == doctest::Approx(0.9 * (1.0 / 50.0) * 2.0 * scale).epsilon(1e-13));
        CHECK(om_sup == doctest::Approx(0.9 * (1.0 / 20.0) * 2.0 * scale).epsilon(1e-13));
        CHECK(inst.params.inertia ==
              doctest::Approx(0.9 * (1.0 / 80.0) * scale / 2.0).epsilon(1e-13));
    }
}

TEST_CASE("uncoupled scenario keeps drifting") {
    const ScenarioConfig cfg = parse(
        "seed = 2\nn = 2\nkappa = 0\nm = 0\nt_end = 2\nsample_interval = 0.1\n"
        "phases = list 0 1\nfrequencies = list 0.3 -0.2\n");
    const RunReport report = run_scenario(cfg);
    CHECK_FALSE(report.summary.died);
    CHECK(report.certificates.empty());
    CHECK(std::isfinite(report.summary.inf_r));
    CHECK(report.summary.inf_r > 0.0);
    CHECK(report.trajectory.back().phases[0] == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("equilibrium data is reported dead immediately") {
    const ScenarioConfig cfg = parse(
        "seed = 2\nn = 2\nkappa = 1\nm = 0\nt_end = 1\nsample_interval = 0.05\n"
        "phases = zero\nfrequencies = zero\n");
    const RunReport report = run_scenario(cfg);
    CHECK(report.summary.died);
    CHECK(report.summary.inf_r == 2.0);
    CHECK(report.summary.r_end == 2.0);
    REQUIRE(report.summary.settle_time.has_value());
    CHECK(*report.summary.settle_time == 0.0);
}

TEST_CASE("out-of-budget data fails its certificate but still runs") {
    const ScenarioConfig cfg = parse(
        "seed = 8\nn = 4\nkappa = 1\nm = 0.001\nt_end = 5\nsample_interval = 0.5\n"
        "phases = uniform -1 1\nfrequencies = list 1 1 1 1\n");
    const RunReport report = run_scenario(cfg);
    bool found = false;
    for (const CertificateReport& c : report.certificates) {
        if (c.name == "smallness-frequency") {
            found = true;
            CHECK_FALSE(c.satisfied);
        }
    }
    CHECK(found);
    CHECK(std::isfinite(report.summary.r_end));
}

TEST_CASE("run outputs are byte-stable and carry the seed header") {
    const ScenarioConfig cfg = parse(
        "seed = 42\nn = 3\nkappa = 1\nm = 0.05\nt_end = 2\nsample_interval = 0.1\n"
        "phases = uniform -2 2\nvelocities = uniform -1 1\nfrequencies = uniform -0.01 0.01\n"
        "label = pair\n");
    const fs::path dir1 = fresh_dir("a");
    const fs::path dir2 = fresh_dir("b");
    write_run_outputs(run_scenario(cfg), cfg, dir1);
    write_run_outputs(run_scenario(cfg), cfg, dir2);

    for (const char* leaf :
         {"pair_trajectory.csv", "pair_certificates.csv", "pair_summary.csv"}) {
        const std::string body1 = read_file(dir1 / leaf);
        CHECK(body1 == read_file(dir2 / leaf));
        CHECK(body1.rfind("# generator=splitmix64 seed=42\n", 0) == 0);
    }
    const std::string summary = read_file(dir1 / "pair_summary.csv");
    CHECK(summary.find("seed,r0,inf_R,R_end,died,settle_time,sample_interval\n") !=
          std::string::npos);

    // the recorded infimum matches a re-scan of the trajectory file
    std::istringstream traj(read_file(dir1 / "pair_trajectory.csv"));
    std::string line;
    double rescan = std::numeric_limits<double>::infinity();
    while (std::getline(traj, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        const std::vector<std::string> cols = split(line, ',');
        REQUIRE(cols.size() == 1 + 2 * 3);
        double r = 0.0;
        for (int i = 1; i <= 3; ++i) r += 1.0 + std::cos(std::stod(cols[i]));
        rescan = std::min(rescan, r / 3.0);
    }
    const RunReport report = run_scenario(cfg);
    CHECK(std::fabs(rescan - report.summary.inf_r) < 1e-12);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("full-death reproduction run") {
    const TheoremSummary s = reproduce_theorem1(1, 8, 500.0);
    CHECK(s.hypotheses_ok);
    CHECK(s.died);
    CHECK(s.conclusion_ok);
    CHECK(s.r0 > 0.0);
    CHECK(s.target == doctest::Approx(s.r0 / 4.0).epsilon(1e-15));
    CHECK(s.inf_r >= s.target - 1e-7);
    CHECK(s.r_end > s.target);

    const TheoremSummary again = reproduce_theorem1(1, 8, 500.0);
    CHECK(again.r0 == s.r0);
    CHECK(again.inf_r == s.inf_r);
    CHECK(again.r_end == s.r_end);
}

TEST_CASE("majority-cluster reproduction run") {
    SUBCASE("published working point") {
        const TheoremSummary s = reproduce_theorem2(7, 5, 2.5, 0.2, -1.0);
        CHECK(s.horizon >= 500.0);
        CHECK(s.hypotheses_ok);
        CHECK(s.died);
        CHECK(s.conclusion_ok);
        CHECK(s.r_end > 1.8);
    }
    SUBCASE("synchronized start is immediate") {
        const TheoremSummary s = reproduce_theorem2(9, 3, 0.0, 0.5, 50.0);
        CHECK(s.r0 == 2.0);
        CHECK(s.hypotheses_ok);
        CHECK(s.conclusion_ok);
        CHECK(s.r_end > 1.5);
    }
    SUBCASE("loose tolerance leaves generous budgets") {
        const TheoremSummary s = reproduce_theorem2(11, 4, 1.0, 0.9, -1.0);
        CHECK(s.hypotheses_ok);
        CHECK(s.conclusion_ok);
        CHECK(s.r_end > 1.1);
    }
}

TEST_CASE("sweep tables") {
    const std::string base_text =
        "seed = 21\nn = 2\nkappa = 1\nm = 0\nt_end = 2\nsample_interval = 0.25\n"
        "phases = uniform -2 2\nfrequencies = uniform -0.05 0.05\n";

    SUBCASE("degenerate one-cell sweep matches a plain run") {
        std::istringstream in(base_text + "axis.kappa = 1.0\n");
        const SweepSpec spec = parse_sweep_spec(in);
        const std::vector<SweepRow> rows = run_sweep(spec);
        REQUIRE(rows.size() == 1);
        CHECK_FALSE(rows[0].failed);

        ScenarioConfig solo = spec.base;
        solo.seed = mix_seed(mix_seed(21, 0), 0);
        solo.kappa = 1.0;
        const RunReport report = run_scenario(solo);
        CHECK(rows[0].seed == solo.seed);
        CHECK(rows[0].died == report.summary.died);
        CHECK(rows[0].inf_r == report.summary.inf_r);
        CHECK(rows[0].r_end == report.summary.r_end);
    }

    SUBCASE("row-major order with the last axis fastest, replicates per cell") {
        std::istringstream in(base_text +
                              "replicates = 2\naxis.kappa = 1 2\naxis.t_end = 1 2 3\n");
        const SweepSpec spec = parse_sweep_spec(in);
        REQUIRE(spec.axes.size() == 2);
        CHECK(spec.axes[0].name == "kappa");
        CHECK(spec.axes[1].name == "t_end");
        CHECK(spec.replicates == 2);

        const std::vector<SweepRow> rows = run_sweep(spec);
        REQUIRE(rows.size() == 12);
        std::size_t j = 0;
        for (double kappa : {1.0, 2.0}) {
            for (double t_end : {1.0, 2.0, 3.0}) {
                for (std::size_t rep = 0; rep < 2; ++rep, ++j) {
                    CHECK(rows[j].axis_values == std::vector<double>{kappa, t_end});
                    CHECK(rows[j].replicate == rep);
                }
            }
        }
        // distinct cells and replicates get distinct seeds
        for (std::size_t p = 0; p < rows.size(); ++p) {
            for (std::size_t q = p + 1; q < rows.size(); ++q) {
                CHECK(rows[p].seed != rows[q].seed);
            }
        }
    }

    SUBCASE("worker count never changes the table") {
        const std::string sweep_text =
            base_text + "replicates = 3\naxis.kappa = 0.5 1 2\naxis.m = 0 0.05\n";
        std::istringstream serial_in(sweep_text + "workers = 1\n");
        std::istringstream parallel_in(sweep_text + "workers = 4\n");
        const SweepSpec serial = parse_sweep_spec(serial_in);
        const SweepSpec parallel = parse_sweep_spec(parallel_in);

        std::ostringstream serial_csv, parallel_csv;
        write_sweep_csv(serial, run_sweep(serial), serial_csv);
        write_sweep_csv(parallel, run_sweep(parallel), parallel_csv);
        CHECK(serial_csv.str() == parallel_csv.str());
        CHECK(serial_csv.str().rfind("# generator=splitmix64 seed=21\n", 0) == 0);
        CHECK(serial_csv.str().find("kappa,m,replicate,seed,died,inf_R,R_end,failed\n") !=
              std::string::npos);
    }

    SUBCASE("axis names are checked") {
        std::istringstream in(base_text + "axis.zeta = 1\n");
        const SweepSpec spec = parse_sweep_spec(in);
        CHECK_THROWS_AS((void)run_sweep(spec), const std::invalid_argument&);
    }

    SUBCASE("inertia axes conflict with derived mode") {
        std::istringstream in(
            "seed = 1\nn = 2\nkappa = 1\nt_end = 1\nmode = derived\nphases = zero\n"
            "axis.m = 0.1 0.2\n");
        const SweepSpec spec = parse_sweep_spec(in);
        CHECK_THROWS_AS((void)run_sweep(spec), const std::invalid_argument&);
    }

    SUBCASE("ratio axis needs a positive coupling") {
        std::istringstream in(base_text + "axis.m_kappa = 0.1\n");
        SweepSpec spec = parse_sweep_spec(in);
        spec.base.kappa = 0.0;
        CHECK_THROWS_AS((void)run_sweep(spec), const std::invalid_argument&);
    }
}
