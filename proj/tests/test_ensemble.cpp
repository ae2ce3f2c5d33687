#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specbox/ensemble.hpp"
#include "specbox/presets.hpp"
#include "test_util.hpp"

using namespace specbox;
using namespace specbox::test;

namespace {

LatticePtr lat2(int n = 16) { return make_lattice({2, n, kTwoPi, 2.0 / 3.0}); }

ForceFamily basic_family(LatticePtr lat, double amplitude) {
    ForceFamily fam;
    auto f = unit_mode(lat, {1, 0, 0});
    f.scale(0.3);
    fam.f_bar = f;
    fam.perturbation_amplitude = amplitude;
    fam.wavevector_schedule = {{0, 2, 0}, {3, 0, 0}, {0, 4, 0}, {4, 3, 0},
                               {0, 5, 0}, {5, 0, 0}, {3, 4, 0}, {4, 4, 0}};
    return fam;
}

} // namespace

TEST_CASE("generate_family: degenerate and dual-distance cases") {
    auto lat = lat2();
    SUBCASE("zero amplitude duplicates the mean force") {
        auto fam = basic_family(lat, 0.0);
        auto members = generate_family(fam, 3);
        for (const auto& m : members)
            CHECK(max_coeff_diff(std::get<SteadyForcing>(m.kind()).base, fam.f_bar) == 0.0);
    }
    SUBCASE("|q_k| = k + 1 gives dual distances amplitude/(k+1)") {
        ForceFamily fam = basic_family(lat, 0.12);
        fam.wavevector_schedule = {{0, 2, 0}, {3, 0, 0}, {0, 4, 0}};  // |q| = 2, 3, 4
        auto members = generate_family(fam, 3);
        for (int k = 0; k < 3; ++k) {
            SpectralField d = std::get<SteadyForcing>(members[static_cast<std::size_t>(k)].kind()).base;
            d.axpy(-1.0, fam.f_bar);
            CHECK(std::sqrt(norms(d).dual_sq) ==
                  doctest::Approx(0.12 / (k + 2)).epsilon(1e-12));
        }
    }
    SUBCASE("family mean approaches f_bar at the orthogonal-sum rate") {
        ForceFamily fam = basic_family(lat, 0.2);
        auto members = generate_family(fam, 4);
        SpectralField sum(lat);
        for (int n = 1; n <= 4; ++n) {
            sum.axpy(1.0, std::get<SteadyForcing>(members[static_cast<std::size_t>(n - 1)].kind()).base);
            SpectralField mean = sum;
            mean.scale(1.0 / n);
            mean.axpy(-1.0, fam.f_bar);
            double expect_sq = 0.0;  // orthogonal modes: sum of squared dual norms
            for (int k = 0; k < n; ++k) {
                const auto& q = fam.wavevector_schedule[static_cast<std::size_t>(k)];
                const double qn = std::sqrt(static_cast<double>(q[0] * q[0] + q[1] * q[1]));
                expect_sq += 0.2 * 0.2 / (qn * qn);
            }
            const double direct = std::sqrt(norms(mean).dual_sq);
            CHECK(direct == doctest::Approx(std::sqrt(expect_sq) / n).epsilon(1e-12));
            // Triangle-inequality bound from the member distances.
            double triangle = 0.0;
            for (int k = 0; k < n; ++k) {
                const auto& q = fam.wavevector_schedule[static_cast<std::size_t>(k)];
                triangle += 0.2 / std::sqrt(static_cast<double>(q[0] * q[0] + q[1] * q[1]));
            }
            CHECK(direct <= triangle / n + 1e-15);
        }
    }
    SUBCASE("schedule shorter than n is rejected") {
        auto fam = basic_family(lat, 0.1);
        CHECK_THROWS_AS(generate_family(fam, 99), std::domain_error);
    }
}

TEST_CASE("cesaro means: constants, cancellation, reference summation") {
    auto lat = lat2(8);
    auto w = random_field(lat, 1, 0.5);
    SUBCASE("all inputs equal") {
        std::vector<SpectralField> in(5, w);
        auto s = cesaro(in);
        for (const auto& m : s) CHECK(max_coeff_diff(m, w) < 1e-15);
    }
    SUBCASE("alternating perturbation cancels at even n") {
        auto y = random_field(lat, 2, 0.3);
        std::vector<SpectralField> in;
        for (int k = 1; k <= 6; ++k) {
            auto v = w;
            v.axpy(k % 2 ? -1.0 : 1.0, y);
            in.push_back(v);
        }
        auto s = cesaro(in);
        CHECK(max_coeff_diff(s[1], w) < 1e-14);
        CHECK(max_coeff_diff(s[3], w) < 1e-14);
        CHECK(max_coeff_diff(s[5], w) < 1e-14);
    }
    SUBCASE("random inputs match direct summation") {
        std::vector<SpectralField> in;
        for (int k = 0; k < 7; ++k) in.push_back(random_field(lat, 10 + static_cast<unsigned>(k), 0.4));
        auto s = cesaro(in);
        for (std::size_t n = 1; n <= in.size(); ++n) {
            SpectralField ref(lat);
            for (std::size_t k = 0; k < n; ++k) ref.axpy(1.0 / static_cast<double>(n), in[k]);
            CHECK(max_coeff_diff(s[n - 1], ref) < 1e-14);
        }
    }
    SUBCASE("empty input is rejected") {
        std::vector<SpectralField> in;
        CHECK_THROWS_AS(cesaro(in), std::domain_error);
    }
}

TEST_CASE("degenerate ensemble: identical realizations") {
    auto lat = lat2(16);
    EnsembleConfig cfg;
    cfg.lattice = lat;
    cfg.family = basic_family(lat, 0.0);
    cfg.n = 4;
    cfg.viscosity = 0.5;
    cfg.dt = 5e-3;
    cfg.horizon = 10.0;
    auto res = run_ensemble(cfg);

    for (double inc : res.report.cauchy_increments) CHECK(inc < 1e-14);
    CHECK(res.report.force_bound_ok);
    CHECK(res.report.realizations_closed);
    // Margin reduces to the single-run stress work plus remainder.
    const auto& r0 = res.realization_reports.front();
    const double expect = (r0.dissipation.stress_work + r0.dissipation.rho +
                           r0.dissipation.flux_turb) / lat->volume();
    CHECK(res.report.dissipativity_margin == doctest::Approx(expect).epsilon(1e-10));
    CHECK(res.report.dissipativity_margin >= -res.report.tol_sign);
}

TEST_CASE("perturbed ensemble: decreasing increments, positive margin") {
    auto lat = lat2(16);
    EnsembleConfig cfg;
    cfg.lattice = lat;
    cfg.family = basic_family(lat, 1e-3);
    cfg.n = 6;
    cfg.viscosity = 0.5;
    cfg.dt = 5e-3;
    cfg.horizon = 20.0;
    auto res = run_ensemble(cfg);

    REQUIRE(res.report.cauchy_increments.size() == 5);
    for (std::size_t m = 2; m + 1 < res.report.cauchy_increments.size(); ++m)
        CHECK(res.report.cauchy_increments[m + 1] < res.report.cauchy_increments[m]);
    CHECK(res.report.dissipativity_margin >= -res.report.tol_sign);
    CHECK(res.report.vbar_v_worst <= res.report.vbar_v_bound);
    CHECK(res.report.realizations_closed);
    // Determinism: the same config reproduces the report bit for bit.
    auto res2 = run_ensemble(cfg);
    CHECK(res2.report.dissipativity_margin == res.report.dissipativity_margin);
    CHECK(res2.report.cauchy_increments == res.report.cauchy_increments);
}

TEST_CASE("parallel execution matches serial") {
    auto lat = lat2(16);
    EnsembleConfig cfg;
    cfg.lattice = lat;
    cfg.family = basic_family(lat, 5e-3);
    cfg.n = 4;
    cfg.viscosity = 0.4;
    cfg.dt = 5e-3;
    cfg.horizon = 5.0;
    cfg.jobs = 1;
    auto serial = run_ensemble(cfg);
    cfg.jobs = 4;
    auto parallel = run_ensemble(cfg);
    CHECK(serial.report.dissipativity_margin == parallel.report.dissipativity_margin);
    CHECK(serial.report.cauchy_increments == parallel.report.cauchy_increments);
    for (std::size_t k = 0; k < serial.v_bars.size(); ++k)
        CHECK(max_coeff_diff(serial.v_bars[k], parallel.v_bars[k]) == 0.0);
}
