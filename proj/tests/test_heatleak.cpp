#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dpbound/heatleak.hpp"
#include "dpbound/stats.hpp"

using namespace dpbound;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

Quantity kg(double v) { return {v, Dimension::mass()}; }
Quantity mol(double v) { return {v, Dimension::amount()}; }

const HeatingModel dp{ModelKind::DP};

} // namespace

TEST_CASE("series invariants are enforced") {
    std::vector<HeatLeakSample> good{
        {1.0, 1e-10, 1e-12}, {2.0, 9e-11, 1e-12}, {3.0, 8e-11, 1e-12},
        {4.0, 7e-11, 1e-12}};
    CHECK_NOTHROW(HeatLeakSeries(good, kg(17)));

    auto bad_t = good;
    bad_t[2].t_s = 2.0; // not strictly increasing
    CHECK_THROWS_AS(HeatLeakSeries(bad_t, kg(17)), InputError);

    auto zero_t = good;
    zero_t[0].t_s = 0.0; // model diverges at t = 0
    CHECK_THROWS_AS(HeatLeakSeries(zero_t, kg(17)), InputError);

    auto bad_sigma = good;
    bad_sigma[1].sigma_w = 0.0;
    CHECK_THROWS_AS(HeatLeakSeries(bad_sigma, kg(17)), InputError);

    CHECK_THROWS_AS(HeatLeakSeries(good, kg(0)), DomainError);
    CHECK_THROWS_AS(HeatLeakSeries(good, kg(17), mol(-1)), DomainError);
}

TEST_CASE("synthetic generator") {
    RelaxationSpec spec; // alpha = 3/4, constant on

    SUBCASE("noiseless values match the model exactly") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.0,
                                              32, {1e3, 1e6}, 99);
        for (const auto& sample : s.samples()) {
            double model = 1e-10 * std::pow(sample.t_s, -0.75) + 1.7e-10;
            CHECK(sample.q_w == model);
            CHECK(sample.sigma_w > 0);
        }
        CHECK(s.samples().front().t_s == doctest::Approx(1e3));
        CHECK(s.samples().back().t_s == doctest::Approx(1e6));
    }

    SUBCASE("same seed gives an identical series, different seed differs") {
        HeatLeakSeries a = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              64, {1e3, 1e6}, 1234);
        HeatLeakSeries b = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              64, {1e3, 1e6}, 1234);
        HeatLeakSeries c = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              64, {1e3, 1e6}, 1235);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.samples().size(); ++i) {
            CHECK(a.samples()[i].q_w == b.samples()[i].q_w);
            any_diff |= a.samples()[i].q_w != c.samples()[i].q_w;
        }
        CHECK(any_diff);
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(generate_synthetic(spec, {1e-10}, 0, 0, 3,
                                           {1e3, 1e6}, 1),
                        InputError);
        CHECK_THROWS_AS(generate_synthetic(spec, {1e-10}, 0, 0, 16,
                                           {1e6, 1e3}, 1),
                        InputError);
        CHECK_THROWS_AS(generate_synthetic(spec, {1e-10, 2e-10}, 0, 0, 16,
                                           {1e3, 1e6}, 1),
                        InputError);
        CHECK_THROWS_AS(generate_synthetic(spec, {1e-10}, 0, -0.1, 16,
                                           {1e3, 1e6}, 1),
                        InputError);
    }
}

TEST_CASE("fit recovers noiseless series exactly") {
    RelaxationSpec spec;

    SUBCASE("power law plus constant") {
        HeatLeakSeries s = generate_synthetic(spec, {2.4e-9}, 1.7e-10, 0.0,
                                              64, {1e3, 3e7}, 5);
        FitResult fit = fit_relaxation(s, spec);
        CHECK(rel_err(fit.amplitudes[0], 2.4e-9) < 1e-9);
        CHECK(rel_err(fit.constant, 1.7e-10) < 1e-9);
        CHECK(fit.dof == 62);
        CHECK(fit.chi2 < 1e-6);
    }

    SUBCASE("pure power law: constant estimate is tiny") {
        HeatLeakSeries s = generate_synthetic(spec, {2.4e-9}, 0.0, 0.0, 64,
                                              {1e3, 3e7}, 5);
        FitResult fit = fit_relaxation(s, spec);
        CHECK(rel_err(fit.amplitudes[0], 2.4e-9) < 1e-9);
        double q_min = 2.4e-9 * std::pow(1e3, -0.75);
        CHECK(std::abs(fit.constant) < 1e-9 * q_min);
    }

    SUBCASE("constant-only series") {
        HeatLeakSeries s = generate_synthetic(spec, {0.0}, 3.3e-10, 0.0, 64,
                                              {1e3, 3e7}, 5);
        FitResult fit = fit_relaxation(s, spec);
        CHECK(std::abs(fit.amplitudes[0]) < 1e-12 * 3.3e-10);
        CHECK(rel_err(fit.constant, 3.3e-10) < 1e-12);
    }

    SUBCASE("two relaxation terms") {
        RelaxationSpec two;
        two.exponents = {0.75, 0.375};
        HeatLeakSeries s = generate_synthetic(two, {2.4e-9, 5.0e-10},
                                              9.9e-11, 0.0, 96, {1e3, 3e7},
                                              5);
        FitResult fit = fit_relaxation(s, two);
        CHECK(rel_err(fit.amplitudes[0], 2.4e-9) < 1e-8);
        CHECK(rel_err(fit.amplitudes[1], 5.0e-10) < 1e-8);
        CHECK(rel_err(fit.constant, 9.9e-11) < 1e-8);
    }
}

TEST_CASE("fit at 5% noise recovers the constant within 3 sd") {
    RelaxationSpec spec;
    HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05, 200,
                                          {1e2, 1e7}, 31415);
    FitResult fit = fit_relaxation(s, spec);
    double sd = std::sqrt(fit.constant_variance());
    CHECK(std::abs(fit.constant - 1.7e-10) < 3 * sd);
    CHECK(fit.dof == 198);
    // chi2 per dof should be near 1 for correctly specified noise
    CHECK(fit.chi2 / fit.dof > 0.5);
    CHECK(fit.chi2 / fit.dof < 1.5);
}

TEST_CASE("coverage: true constant within 2 sd in at least 90 of 100 seeds") {
    RelaxationSpec spec;
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              200, {1e2, 1e7}, 1000 + seed);
        FitResult fit = fit_relaxation(s, spec);
        double sd = std::sqrt(fit.constant_variance());
        if (std::abs(fit.constant - 1.7e-10) <= 2 * sd) ++covered;
    }
    CHECK(covered >= 90);
}

TEST_CASE("free-exponent scan finds the generating exponent") {
    RelaxationSpec gen;
    gen.exponents = {0.6};
    HeatLeakSeries s = generate_synthetic(gen, {2e-9}, 1.5e-10, 0.0, 96,
                                          {1e3, 3e7}, 77);
    RelaxationSpec scan;
    scan.exponents = {0.75}; // starting value is irrelevant to the scan
    scan.free_exponent = true;
    FitResult fit = fit_relaxation(s, scan);
    REQUIRE(fit.fitted_exponent.has_value());
    CHECK(*fit.fitted_exponent == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(rel_err(fit.constant, 1.5e-10) < 1e-6);
    CHECK(fit.dof == 93); // n - (amplitude + constant + scanned exponent)
}

TEST_CASE("temperature-style exponent 3/8 is just another spec") {
    RelaxationSpec spec;
    spec.exponents = {0.375};
    HeatLeakSeries s = generate_synthetic(spec, {5e-8}, 2e-10, 0.0, 48,
                                          {1e3, 3e7}, 11);
    FitResult fit = fit_relaxation(s, spec);
    CHECK(rel_err(fit.amplitudes[0], 5e-8) < 1e-9);
    CHECK(rel_err(fit.constant, 2e-10) < 1e-9);
}

TEST_CASE("fit input validation and singularity") {
    RelaxationSpec spec;
    HeatLeakSeries tiny = generate_synthetic(spec, {1e-10}, 1e-10, 0.0, 4,
                                             {1e3, 1e6}, 3);
    // 4 samples satisfy 2 parameters + 2, but not 3 parameters + 2
    CHECK_NOTHROW(fit_relaxation(tiny, spec));
    RelaxationSpec three;
    three.exponents = {0.75, 0.375};
    CHECK_THROWS_AS(fit_relaxation(tiny, three), InputError);

    RelaxationSpec dupes;
    dupes.exponents = {0.75, 0.75};
    HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1e-10, 0.0, 32,
                                          {1e3, 1e6}, 3);
    CHECK_THROWS_AS(fit_relaxation(s, dupes), InputError);

    RelaxationSpec negative;
    negative.exponents = {-0.75};
    CHECK_THROWS_AS(fit_relaxation(s, negative), InputError);

    // nearly identical exponents make the basis numerically collinear
    RelaxationSpec collinear;
    collinear.exponents = {0.75, 0.75 + 1e-13};
    CHECK_THROWS_AS(fit_relaxation(s, collinear), SingularFitError);

    RelaxationSpec free_two;
    free_two.exponents = {0.5, 0.75};
    free_two.free_exponent = true;
    CHECK_THROWS_AS(fit_relaxation(s, free_two), InputError);
}

TEST_CASE("residual limit arithmetic") {
    RelaxationSpec spec;

    SUBCASE("fit constant of 170 pW on 17 kg with no background is 10 pW/kg") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 1.7e-10, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        FitResult fit = fit_relaxation(s, spec);
        BackgroundBudget none{Quantity{0.0, Dimension::molar_power()}, 0.5};
        ResidualLimit lim =
            residual_specific_power(fit, s, none, Material::copper(), 0.95);
        CHECK(rel_err(lim.central.value(), 1e-11) < 1e-6);
        CHECK(lim.sigma.value() < 1e-15);
        CHECK(rel_err(lim.upper_limit.value(), 1e-11) < 1e-3);
    }

    SUBCASE("background equal to the constant nulls the central value") {
        // constant equivalent to 1 pW/mol on copper
        double moles = 17.0 / 0.063546;
        double constant = 1e-12 * moles;
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, constant, 0.0,
                                              64, {1e3, 3e7}, 21, kg(17),
                                              mol(moles));
        FitResult fit = fit_relaxation(s, spec);
        BackgroundBudget bg; // 1 pW/mol, 50%
        ResidualLimit lim =
            residual_specific_power(fit, s, bg, Material::copper(), 0.95);
        CHECK(std::abs(lim.central.value()) < 1e-6 * constant);
        // upper limit collapses to z * sigma
        double z = normal_quantile(0.95);
        CHECK(rel_err(lim.upper_limit.value(), z * lim.sigma.value()) < 1e-6);
        // sigma is dominated by the 50% background uncertainty
        double bg_specific = 1e-12 * moles / 17.0;
        CHECK(rel_err(lim.sigma.value(), 0.5 * bg_specific) < 1e-3);
    }

    SUBCASE("negative net residual keeps a non-negative upper limit") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 1.0e-11, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        FitResult fit = fit_relaxation(s, spec);
        BackgroundBudget bg; // subtracts ~267 pW, far above the constant
        ResidualLimit lim =
            residual_specific_power(fit, s, bg, Material::copper(), 0.95);
        CHECK(lim.central.value() < 0);
        CHECK(lim.upper_limit.value() >= 0);
    }

    SUBCASE("moles fall back to mass over molar mass") {
        HeatLeakSeries with_moles = generate_synthetic(
            spec, {1e-9}, 2.5e-10, 0.0, 64, {1e3, 3e7}, 21, kg(17),
            mol(17.0 / 0.063546));
        HeatLeakSeries without = generate_synthetic(
            spec, {1e-9}, 2.5e-10, 0.0, 64, {1e3, 3e7}, 21, kg(17));
        FitResult fit = fit_relaxation(with_moles, spec);
        BackgroundBudget bg;
        ResidualLimit a = residual_specific_power(fit, with_moles, bg,
                                                  Material::copper(), 0.95);
        ResidualLimit b = residual_specific_power(fit, without, bg,
                                                  Material::copper(), 0.95);
        CHECK(rel_err(a.central.value(), b.central.value()) < 1e-12);
    }

    SUBCASE("molar background without moles or material is an input error") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 2.5e-10, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        FitResult fit = fit_relaxation(s, spec);
        BackgroundBudget bg;
        CHECK_THROWS_AS(
            residual_specific_power(fit, s, bg, std::nullopt, 0.95),
            InputError);
    }

    SUBCASE("confidence must be a probability") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 2.5e-10, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        FitResult fit = fit_relaxation(s, spec);
        BackgroundBudget bg;
        CHECK_THROWS_AS(residual_specific_power(fit, s, bg,
                                                Material::copper(), 0.0),
                        InputError);
        CHECK_THROWS_AS(residual_specific_power(fit, s, bg,
                                                Material::copper(), 1.0),
                        InputError);
    }
}

TEST_CASE("bound_from_series composes fit, subtraction and inversion") {
    RelaxationSpec spec;

    SUBCASE("an upper limit of 10 pW/kg lands on the 4.6e-12 m bound") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 1.7e-10, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        BackgroundBudget none{Quantity{0.0, Dimension::molar_power()}, 0.5};
        LengthBound b = bound_from_series(s, spec, none, Material::copper(),
                                          dp, 0.95);
        CHECK(rel_err(b.length.value(), 4.6303695372118643e-12) < 1e-3);
        CHECK(b.model == ModelKind::DP);
        CHECK(b.source.find("upper limit") != std::string::npos);
    }

    SUBCASE("classical channel on the same series") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, 1.7e-10, 0.0, 64,
                                              {1e3, 3e7}, 21, kg(17));
        BackgroundBudget none{Quantity{0.0, Dimension::molar_power()}, 0.5};
        LengthBound b = bound_from_series(
            s, spec, none, Material::copper(),
            HeatingModel{ModelKind::ClassicalChannel}, 0.95);
        CHECK(rel_err(b.length.value(), 8.8953005860715281e-12) < 1e-3);
    }

    SUBCASE("doubling the limit shrinks the bound by 2^(1/3)") {
        HeatLeakSeries s1 = generate_synthetic(spec, {1e-9}, 1.7e-10, 0.0,
                                               64, {1e3, 3e7}, 21, kg(17));
        HeatLeakSeries s2 = generate_synthetic(spec, {1e-9}, 3.4e-10, 0.0,
                                               64, {1e3, 3e7}, 21, kg(17));
        BackgroundBudget none{Quantity{0.0, Dimension::molar_power()}, 0.5};
        double b1 = bound_from_series(s1, spec, none, Material::copper(), dp,
                                      0.95)
                        .length.value();
        double b2 = bound_from_series(s2, spec, none, Material::copper(), dp,
                                      0.95)
                        .length.value();
        CHECK(rel_err(b1 / b2, std::cbrt(2.0)) < 1e-3);
    }
}

TEST_CASE("pipeline monotonicity: larger limit, smaller bound") {
    RelaxationSpec spec;
    BackgroundBudget none{Quantity{0.0, Dimension::molar_power()}, 0.5};
    double prev = 1e9;
    for (double constant : {1e-10, 2e-10, 4e-10, 8e-10}) {
        HeatLeakSeries s = generate_synthetic(spec, {1e-9}, constant, 0.0,
                                              64, {1e3, 3e7}, 21, kg(17));
        double b = bound_from_series(s, spec, none, Material::copper(), dp,
                                     0.95)
                       .length.value();
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("bootstrap uncertainty") {
    RelaxationSpec spec;

    SUBCASE("noiseless series has vanishing bootstrap spread") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.0,
                                              64, {1e3, 3e7}, 8);
        BootstrapSummary bs = bootstrap_uncertainty(s, spec, 100, 17);
        CHECK(bs.sd < 1e-9 * std::abs(bs.mean));
        CHECK(bs.n_dropped == 0);
        CHECK_FALSE(bs.high_drop_warning);
    }

    SUBCASE("same seed twice is bit-identical") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              128, {1e2, 1e7}, 8);
        BootstrapSummary a = bootstrap_uncertainty(s, spec, 200, 99);
        BootstrapSummary b = bootstrap_uncertainty(s, spec, 200, 99);
        CHECK(a.mean == b.mean);
        CHECK(a.sd == b.sd);
        CHECK(a.p025 == b.p025);
        CHECK(a.p975 == b.p975);
    }

    SUBCASE("bootstrap sd within factor 2 of the analytic estimate") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              200, {1e2, 1e7}, 8);
        FitResult fit = fit_relaxation(s, spec);
        double analytic = std::sqrt(fit.constant_variance());
        BootstrapSummary bs = bootstrap_uncertainty(s, spec, 400, 99);
        CHECK(bs.sd > analytic / 2);
        CHECK(bs.sd < analytic * 2);
        CHECK(bs.p025 < bs.p160);
        CHECK(bs.p160 < bs.p500);
        CHECK(bs.p500 < bs.p840);
        CHECK(bs.p840 < bs.p975);
    }

    SUBCASE("replicate floor") {
        HeatLeakSeries s = generate_synthetic(spec, {1e-10}, 1.7e-10, 0.05,
                                              64, {1e2, 1e7}, 8);
        CHECK_THROWS_AS(bootstrap_uncertainty(s, spec, 99, 1), InputError);
    }
}

TEST_CASE("series file io round-trips") {
    RelaxationSpec spec;
    HeatLeakSeries s = generate_synthetic(spec, {2.4e-9}, 1.7e-10, 0.05, 32,
                                          {1e3, 3e7}, 4, kg(17),
                                          mol(267.52273943285179),
                                          "gloos-stage");
    std::ostringstream out;
    s.write(out);
    std::istringstream in(out.str());
    HeatLeakSeries back = HeatLeakSeries::read(in);
    CHECK(back.stage_mass().value() == s.stage_mass().value());
    REQUIRE(back.stage_moles().has_value());
    CHECK(back.stage_moles()->value() == s.stage_moles()->value());
    CHECK(back.label() == "gloos-stage");
    REQUIRE(back.samples().size() == s.samples().size());
    for (std::size_t i = 0; i < s.samples().size(); ++i) {
        CHECK(back.samples()[i].t_s == s.samples()[i].t_s);
        CHECK(back.samples()[i].q_w == s.samples()[i].q_w);
        CHECK(back.samples()[i].sigma_w == s.samples()[i].sigma_w);
    }
}

TEST_CASE("series file parsing errors") {
    SUBCASE("missing sigma column") {
        std::istringstream in("# mass_kg = 17\n1000,1e-10\n");
        CHECK_THROWS_AS(HeatLeakSeries::read(in), ParseError);
    }
    SUBCASE("missing mass header") {
        std::istringstream in("1000,1e-10,1e-12\n");
        CHECK_THROWS_AS(HeatLeakSeries::read(in), ParseError);
    }
    SUBCASE("bad numeric field") {
        std::istringstream in("# mass_kg = 17\n1000,abc,1e-12\n");
        CHECK_THROWS_AS(HeatLeakSeries::read(in), ParseError);
    }
    SUBCASE("comments and blank lines are fine") {
        std::istringstream in("# mass_kg = 17\n# label = x\n\n# comment\n"
                              "1000,1e-10,1e-12\n2000,9e-11,1e-12\n");
        HeatLeakSeries s = HeatLeakSeries::read(in);
        CHECK(s.samples().size() == 2);
        CHECK(s.label() == "x");
        CHECK_FALSE(s.stage_moles().has_value());
    }
}
