#include <doctest.h>

#include "qrep/config.hpp"
#include "qrep/verify.hpp"
#include "qrep/gates.hpp"

using namespace qrep;

TEST_CASE("parsing a flat config") {
    const SimConfig cfg = parse_config(
        "# comment\n"
        "t_coh = 12.5\n"
        "eta_s = 0.75\n"
        "L = 800\n"
        "n = 6\n"
        "n_m = 20\n");
    CHECK(cfg.params.t_coh == 12.5);
    CHECK(cfg.params.eta_s == 0.75);
    CHECK(cfg.topology.length_km == 800.0);
    CHECK(cfg.topology.nesting == 6);
    CHECK_FALSE(cfg.n_auto);
    CHECK(cfg.topology.multiplex == 20);
    // untouched fields keep their defaults
    CHECK(cfg.params.p_cn == 0.99);
}

TEST_CASE("n = auto requests depth optimization") {
    const SimConfig cfg = parse_config("n = auto\n");
    CHECK(cfg.n_auto);
}

TEST_CASE("unknown keys are hard errors with a position") {
    try {
        parse_config("eta_q = 0.5\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("eta_q") != std::string::npos);
        CHECK(e.line == 1);
        CHECK(e.column >= 1);
    }
    try {
        parse_config("eta_s = 0.8\nbogus_key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("malformed values report line and column") {
    CHECK_THROWS_AS(parse_config("eta_s = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("eta_s 0.8\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[weird]\n"), ConfigError);
}

TEST_CASE("sweep section with axes, ranges and outputs") {
    const SimConfig cfg = parse_config(
        "L = 1000\n"
        "[sweep]\n"
        "axis eta_s = 0.7,0.8,0.9\n"
        "axis L = 200:400:100\n"
        "outputs = R_hz,F_avg\n"
        "format = json\n"
        "optimize_n = true\n"
        "n_max = 10\n");
    REQUIRE(cfg.sweep.axes.size() == 2);
    CHECK(cfg.sweep.axes[0].field == "eta_s");
    CHECK(cfg.sweep.axes[0].values == std::vector<double>{0.7, 0.8, 0.9});
    CHECK(cfg.sweep.axes[1].values == std::vector<double>{200.0, 300.0, 400.0});
    CHECK(cfg.sweep.outputs == std::vector<std::string>{"R_hz", "F_avg"});
    CHECK(cfg.sweep.format == "json");
    CHECK(cfg.sweep.optimize_n);
    CHECK(cfg.sweep.n_max == 10);

    CHECK_THROWS_AS(parse_config("[sweep]\naxis nope = 1,2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sweep]\noutputs = nope\n"), ConfigError);
}

TEST_CASE("config round trip is the identity") {
    const std::string source =
        "t_coh = 11\n"
        "eta_s = 0.85\n"
        "L = 600\n"
        "n = 5\n"
        "[sweep]\n"
        "axis epsilon_CN = 1e-05,0.00026\n"
        "optimize_n = false\n";
    const SimConfig cfg = parse_config(source);
    const std::string serialized = serialize_config(cfg);
    const SimConfig reparsed = parse_config(serialized);
    CHECK(serialize_config(reparsed) == serialized);
}

TEST_CASE("overrides reuse the config keys") {
    SimConfig cfg;
    apply_override(cfg, "eta_s=0.7");
    apply_override(cfg, "n=4");
    CHECK(cfg.params.eta_s == 0.7);
    CHECK(cfg.topology.nesting == 4);
    CHECK_FALSE(cfg.n_auto);
    CHECK_THROWS_AS(apply_override(cfg, "nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "eta_s"), ConfigError);
}

TEST_CASE("field registry covers params and topology") {
    SimConfig cfg;
    for (const std::string& name : parameter_field_names()) {
        set_field(cfg, name, get_field(cfg, name));
    }
    CHECK(get_field(cfg, "p_CN") == 0.99);
    CHECK_THROWS_AS(get_field(cfg, "unknown"), ConfigError);
}

TEST_CASE("report schema names") {
    const auto& names = report_field_names();
    REQUIRE(names.size() == 10);
    CHECK(names.front() == "p0");
    CHECK(names.back() == "n_CN");
    RateReport r;
    r.rate_hz = 3.5;
    CHECK(report_field_value(r, "R_hz") == 3.5);
    CHECK_THROWS_AS(report_field_value(r, "nope"), ConfigError);
}

TEST_CASE("figure presets encode the published ranges") {
    const SimConfig fig6 = preset_config("fig6");
    REQUIRE(fig6.sweep.axes.size() == 2);
    CHECK(fig6.sweep.axes[0].field == "epsilon_CN");
    CHECK(fig6.sweep.axes[0].values.front() == doctest::Approx(1e-5));
    CHECK(fig6.sweep.axes[0].values.back() == doctest::Approx(5.1e-4));
    CHECK(fig6.sweep.axes[1].field == "eta_s");
    CHECK(fig6.sweep.axes[1].values.front() == doctest::Approx(0.7));
    CHECK(fig6.sweep.axes[1].values.back() == doctest::Approx(0.9));
    CHECK(fig6.topology.multiplex == 10);
    CHECK(fig6.topology.length_km == 1000.0);
    CHECK(fig6.sweep.optimize_n);

    const SimConfig fig7 = preset_config("fig7");
    CHECK(fig7.sweep.axes[1].field == "t_coh");
    CHECK(fig7.sweep.axes[1].values.front() == doctest::Approx(1.0));
    CHECK(fig7.sweep.axes[1].values.back() == doctest::Approx(51.0));

    const SimConfig figA3 = preset_config("figA3");
    CHECK(figA3.topology.multiplex == 100);

    const SimConfig fig5c = preset_config("fig5c");
    CHECK(fig5c.params.p_cn == 0.95);
    CHECK(fig5c.params.eta_d == 0.95);
    CHECK(fig5c.params.eta_c == 0.95);
    CHECK(fig5c.sweep.axes[0].field == "L");
    CHECK(fig5c.sweep.axes[0].values.front() == doctest::Approx(200.0));
    CHECK(fig5c.sweep.axes[0].values.back() == doctest::Approx(1000.0));

    CHECK_THROWS_AS(preset_config("fig99"), ConfigError);
}

TEST_CASE("digest is stable") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}

TEST_CASE("verification suites all pass on the real gate") {
    for (const SuiteResult& suite : run_verification()) {
        INFO(suite.name);
        for (const std::string& f : suite.failures) INFO(f);
        CHECK(suite.passed());
    }
}

TEST_CASE("a sign flip in the truth table is caught and named") {
    VerifyOptions options;
    Matrix mutated = controlled_phase_matrix();
    mutated(4, 4) = -1.0;  // flip the |1>|l> entry
    options.gate_override = mutated;

    const auto results = run_verification(options);
    bool found = false;
    for (const SuiteResult& suite : results) {
        if (suite.name != "gate-truth-tables") continue;
        CHECK_FALSE(suite.passed());
        for (const std::string& failure : suite.failures) {
            if (failure.find("|1>|l>") != std::string::npos) found = true;
        }
    }
    CHECK(found);
}
