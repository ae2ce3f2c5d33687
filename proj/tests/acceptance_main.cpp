// Acceptance suite: runs every criterion at its stated scale and tolerance,
// printing one PASS/FAIL line per criterion. Exit code 0 only if all pass.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include "specbox/averaging.hpp"
#include "specbox/ensemble.hpp"
#include "specbox/experiment.hpp"
#include "specbox/presets.hpp"
#include "specbox/report.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace specbox;
namespace fs = std::filesystem;

namespace {

LatticePtr lat2d(int n) { return make_lattice({2, n, kTwoPi, 2.0 / 3.0}); }
LatticePtr lat3d(int n) { return make_lattice({3, n, kTwoPi, 2.0 / 3.0}); }

SpectralField scaled_mode(const LatticePtr& lat, std::array<int, 3> n, double amp) {
    auto m = unit_mode(lat, n);
    m.scale(amp);
    return m;
}

SpectralField stokes_steady(const SpectralField& f, double nu) {
    SpectralField v(f.lattice());
    for (const auto& m : f.lattice()->retained())
        for (int c = 0; c < f.dim(); ++c) v.at(c, m.index) = f.at(c, m.index) / (nu * m.kappa_sq);
    return v;
}

struct SuiteCase {
    std::string name;
    SolverConfig cfg;
    std::vector<double> horizons;
    double uloc = 0.0;
    RunResult result;
    std::vector<ReynoldsAggregate> aggs;
    std::vector<ReynoldsReport> reports;
    std::vector<MtBoundVerdicts> mt_bounds;
    double wall_seconds = 0.0;
};

void run_case(SuiteCase& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    sc.uloc = sc.cfg.forcing.uloc_norm(std::max(2.0, sc.cfg.t_end + 1.0));
    TimeAverager avg(sc.cfg.lattice);
    std::size_t next = 0;
    std::vector<SampleObserver> obs = {[&](const Sample& s) {
        avg.accumulate(s);
        if (next < sc.horizons.size() &&
            std::abs(s.scalars.t - sc.horizons[next]) < 1e-9 * std::max(1.0, sc.horizons[next])) {
            sc.aggs.push_back(avg.finalize(sc.cfg.viscosity));
            sc.reports.push_back(make_report(sc.aggs.back(), sc.uloc));
            sc.mt_bounds.push_back(avg.mt_operator_bound_check(sc.uloc, sc.cfg.viscosity));
            sc.reports.back().mt_bounds = sc.mt_bounds.back();
            ++next;
        }
    }};
    sc.result = run(sc.cfg, obs);
    sc.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// The six-case suite shared by criteria 3, 4, 5, 6 and 9.
std::vector<SuiteCase>& suite() {
    static std::vector<SuiteCase> cases;
    if (!cases.empty()) return cases;
    const std::vector<double> horizons2d = {25.0, 50.0, 100.0, 200.0};

    {
        SuiteCase sc;
        sc.name = "steady-2d";
        auto lat = lat2d(64);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.18;
        sc.cfg.dt = 2.5e-3;
        sc.cfg.t_end = 200.0;
        auto f = scaled_mode(lat, {1, 0, 0}, 0.12);
        f.axpy(1.0, scaled_mode(lat, {0, 2, 0}, 0.10));
        sc.cfg.forcing = ForcingSpec(SteadyForcing{f});
        sc.cfg.initial = random_div_free(lat, 41, 0.3);
        sc.horizons = horizons2d;
        cases.push_back(std::move(sc));
    }
    {
        // Attracted-to-steady case: force and transient share one mode, so the
        // dynamics stay exactly linear and the finite-t dissipativity shadow
        // carries no nonlinear O(1/t) pollution.
        SuiteCase sc;
        sc.name = "convergent-to-steady-2d";
        auto lat = lat2d(64);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.5;
        sc.cfg.dt = 2.5e-3;
        sc.cfg.t_end = 200.0;
        auto limit = scaled_mode(lat, {1, 0, 0}, 0.25);
        auto transient = scaled_mode(lat, {1, 0, 0}, 0.2);
        sc.cfg.forcing = ForcingSpec(ConvergentToSteadyForcing{limit, transient, 0.25});
        sc.cfg.initial = stokes_steady(limit, sc.cfg.viscosity);
        sc.horizons = horizons2d;
        cases.push_back(std::move(sc));
    }
    {
        SuiteCase sc;
        sc.name = "time-periodic-2d";
        auto lat = lat2d(64);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.15;
        sc.cfg.dt = 2.5e-3;
        sc.cfg.t_end = 200.0;
        auto base = scaled_mode(lat, {1, 0, 0}, 0.12);
        auto mod = scaled_mode(lat, {0, 1, 0}, 0.10);
        mod.axpy(1.0, scaled_mode(lat, {2, 1, 0}, 0.08));
        sc.cfg.forcing = ForcingSpec(TimePeriodicForcing{base, mod, 1.3});
        sc.cfg.initial = random_div_free(lat, 43, 0.2);
        sc.horizons = horizons2d;
        cases.push_back(std::move(sc));
    }
    {
        SuiteCase sc;
        sc.name = "bursts-2d";
        auto lat = lat2d(64);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.15;
        sc.cfg.dt = 2.5e-3;
        sc.cfg.t_end = 200.0;
        auto pulse = scaled_mode(lat, {1, 0, 0}, 0.35);
        pulse.axpy(1.0, scaled_mode(lat, {0, 2, 0}, 0.25));
        sc.cfg.forcing = ForcingSpec(BurstsForcing{pulse, 0.25, 1.0});
        sc.cfg.initial = random_div_free(lat, 44, 0.2);
        sc.horizons = horizons2d;
        cases.push_back(std::move(sc));
    }
    {
        SuiteCase sc;
        sc.name = "random-phases-2d";
        auto lat = lat2d(64);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.15;
        sc.cfg.dt = 2.5e-3;
        sc.cfg.t_end = 200.0;
        RandomPhasesForcing rp;
        rp.modes = {{{1, 0, 0}, 0.15}, {{0, 1, 0}, 0.12}, {{1, 1, 0}, 0.10}, {{2, 1, 0}, 0.08}};
        rp.correlation_time = 2.0;
        rp.seed = 7;
        rp.lattice = lat;
        sc.cfg.forcing = ForcingSpec(std::move(rp));
        sc.cfg.initial = random_div_free(lat, 45, 0.2);
        sc.horizons = horizons2d;
        cases.push_back(std::move(sc));
    }
    {
        SuiteCase sc;
        sc.name = "bursts-3d";
        auto lat = lat3d(32);
        sc.cfg.lattice = lat;
        sc.cfg.viscosity = 0.3;
        sc.cfg.dt = 5e-3;
        sc.cfg.t_end = 50.0;
        auto pulse = scaled_mode(lat, {1, 0, 0}, 0.3);
        pulse.axpy(1.0, scaled_mode(lat, {0, 1, 1}, 0.2));
        sc.cfg.forcing = ForcingSpec(BurstsForcing{pulse, 0.25, 1.0});
        sc.cfg.initial = random_div_free(lat, 46, 0.15);
        sc.horizons = {12.5, 25.0, 50.0};
        cases.push_back(std::move(sc));
    }
    for (auto& sc : cases) {
        run_case(sc);
        std::printf("        [suite] %-26s %6.1f s\n", sc.name.c_str(), sc.wall_seconds);
        std::fflush(stdout);
    }
    return cases;
}

struct Check {
    bool ok = true;
    std::ostringstream detail;

    template <typename... Args>
    void require(bool cond, const char* fmt, Args... args) {
        char buf[512];
        if constexpr (sizeof...(Args) == 0)
            std::snprintf(buf, sizeof buf, "%s", fmt);
        else
            std::snprintf(buf, sizeof buf, fmt, args...);
        detail << "        " << (cond ? "ok  " : "BAD ") << buf << "\n";
        ok = ok && cond;
    }
};

// ---------------------------------------------------------------------------
// Criterion 1: analytic-solution fidelity.
bool criterion_1(Check& c) {
    // Single-mode Stokes decay at several dt, all within the CFL guard.
    auto lat = lat2d(16);
    SpectralField v0(lat);
    v0.add_mode({2, 1, 0}, {{0.004, 0.002}, {-0.008, -0.004}});
    leray_project(v0);
    const double nu = 0.7;
    for (double dt : {0.15, 0.01, 1e-3}) {
        SolverConfig cfg;
        cfg.lattice = lat;
        cfg.viscosity = nu;
        cfg.dt = dt;
        cfg.t_end = 1.5;
        cfg.forcing = ForcingSpec(SteadyForcing{SpectralField(lat)});
        cfg.initial = v0;
        const double steps = cfg.t_end / dt;
        if (std::abs(steps - std::llround(steps)) > 1e-9) continue;
        auto res = run(cfg);
        auto expect = v0;
        expect.scale(std::exp(-nu * 5.0 * cfg.t_end));
        double worst = 0.0;
        for (std::size_t i = 0; i < expect.raw().size(); ++i) {
            const double mag = std::abs(expect.raw()[i]);
            if (mag > 0.0)
                worst = std::max(worst,
                                 std::abs(res.final_state.v.raw()[i] - expect.raw()[i]) / mag);
        }
        c.require(worst <= 1e-12, "stokes decay dt=%g: rel error %.3e <= 1e-12", dt, worst);
    }
    // Taylor-Green at the pinned scale.
    {
        auto lat32 = lat2d(32);
        SolverConfig cfg;
        cfg.lattice = lat32;
        cfg.viscosity = 0.1;
        cfg.dt = 1e-3;
        cfg.t_end = 1.0;
        cfg.forcing = ForcingSpec(SteadyForcing{SpectralField(lat32)});
        cfg.initial = taylor_green(lat32);
        auto res = run(cfg);
        auto expect = cfg.initial;
        expect.scale(std::exp(-0.2));
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < expect.raw().size(); ++i) {
            worst = std::max(worst, std::abs(res.final_state.v.raw()[i] - expect.raw()[i]));
            scale = std::max(scale, std::abs(expect.raw()[i]));
        }
        c.require(worst <= 1e-8 * scale, "taylor-green nu=0.1 t=1 N=32: rel error %.3e <= 1e-8",
                  worst / scale);
    }
    return c.ok;
}

// Criterion 2: energy-balance residual and its order under dt halving.
bool criterion_2(Check& c) {
    auto lat = lat2d(32);
    auto residual_rate = [&](double nu, double dt) {
        SolverConfig cfg;
        cfg.lattice = lat;
        cfg.viscosity = nu;
        cfg.dt = dt;
        cfg.t_end = 1.0;
        cfg.forcing = ForcingSpec(SteadyForcing{SpectralField(lat)});
        cfg.initial = taylor_green(lat);
        auto res = run(cfg);
        double total = 0.0;
        for (double r : energy_residual(res.series, nu)) total += std::abs(r);
        return total / cfg.t_end;
    };
    const double rate = residual_rate(0.1, 1e-3);
    c.require(rate <= 1e-8, "taylor-green residual %.3e per unit time <= 1e-8", rate);

    const double r1 = residual_rate(0.4, 8e-3);
    const double r2 = residual_rate(0.4, 4e-3);
    c.require(r1 / r2 >= 8.0, "halving 8e-3 -> 4e-3: ratio %.1f >= 8 (order >= 3)", r1 / r2);
    return c.ok;
}

// Criterion 3: a-priori bounds across the six-case suite.
bool criterion_3(Check& c) {
    double total = 0.0;
    for (auto& sc : suite()) {
        total += sc.wall_seconds;
        const double v0_sq = sc.result.series.rows.front().energy;
        auto v = verify_apriori_bounds(sc.result.series, sc.uloc, sc.cfg.viscosity,
                                       sc.cfg.lattice->spec().poincare_constant(), v0_sq);
        c.require(v.energy.ok && v.energy.slack >= 0.0, "%s energy bound slack %.3e",
                  sc.name.c_str(), v.energy.slack);
        c.require(v.dissipation.ok && v.dissipation.slack >= 0.0,
                  "%s dissipation bound slack %.3e", sc.name.c_str(), v.dissipation.slack);
        c.require(v.window.ok && v.window.slack >= 0.0, "%s unit-window bound slack %.3e",
                  sc.name.c_str(), v.window.slack);
    }
    c.require(total < 900.0, "suite runtime %.0f s < 900 s", total);
    return c.ok;
}

// Criterion 4: the averaged-operator lemma bounds at every dyadic horizon.
bool criterion_4(Check& c) {
    for (auto& sc : suite())
        for (std::size_t h = 0; h < sc.mt_bounds.size(); ++h) {
            const auto& mt = sc.mt_bounds[h];
            c.require(mt.applicable && mt.mean_force.ok && mt.mean_gradient.ok &&
                          mt.mean_force_sq.ok && mt.mean_work.ok,
                      "%s t=%g: |M_t f| slack %.2e, grad slack %.2e, f^2 slack %.2e, work slack %.2e",
                      sc.name.c_str(), sc.horizons[h], mt.mean_force.slack,
                      mt.mean_gradient.slack, mt.mean_force_sq.slack, mt.mean_work.slack);
        }
    return c.ok;
}

// Criterion 5: exact finite-t identities on every case and horizon.
bool criterion_5(Check& c) {
    for (auto& sc : suite())
        for (std::size_t h = 0; h < sc.aggs.size(); ++h) {
            const auto& ck = sc.aggs[h].checks;
            const double worst =
                std::max({ck.reynolds_decomposition, ck.orthogonality, ck.flux_decomposition,
                          ck.f_equals_div_r, ck.integration_by_parts});
            c.require(worst <= 1e-10,
                      "%s t=%g: decomp %.1e, orth %.1e, flux %.1e, F=divR %.1e, ibp %.1e",
                      sc.name.c_str(), sc.horizons[h], ck.reynolds_decomposition,
                      ck.orthogonality, ck.flux_decomposition, ck.f_equals_div_r,
                      ck.integration_by_parts);
        }
    return c.ok;
}

// Criterion 6: dissipation closure everywhere; flux decay and dissipativity
// for the attracted-to-steady case.
bool criterion_6(Check& c) {
    for (auto& sc : suite())
        for (const auto& rep : sc.reports)
            c.require(std::abs(rep.dissipation.margin) <= rep.tol_identity,
                      "%s t=%g: |margin| %.3e <= tol %.3e", sc.name.c_str(), rep.t,
                      std::abs(rep.dissipation.margin), rep.tol_identity);
    for (auto& sc : suite()) {
        if (sc.name != "convergent-to-steady-2d") continue;
        const auto& reps = sc.reports;  // horizons 25, 50, 100, 200
        c.require(reps[2].dissipation.flux_turb < reps[1].dissipation.flux_turb &&
                      reps[3].dissipation.flux_turb < reps[2].dissipation.flux_turb,
                  "flux_turb decreasing: %.3e > %.3e > %.3e", reps[1].dissipation.flux_turb,
                  reps[2].dissipation.flux_turb, reps[3].dissipation.flux_turb);
        c.require(reps[3].dissipation.stress_work >= -reps[3].tol_sign,
                  "stress_work %.3e >= -tol_sign -%.3e at t=200",
                  reps[3].dissipation.stress_work, reps[3].tol_sign);
    }
    return c.ok;
}

// Criterion 7: Reynolds weak residual at dt = 1e-3, decreasing in t.
bool criterion_7(Check& c) {
    auto lat = lat2d(64);
    SuiteCase sc;
    sc.name = "reynolds-residual-2d";
    sc.cfg.lattice = lat;
    sc.cfg.viscosity = 0.5;
    sc.cfg.dt = 1e-3;
    sc.cfg.t_end = 200.0;
    auto limit = scaled_mode(lat, {1, 0, 0}, 0.25);
    auto transient = scaled_mode(lat, {0, 1, 0}, 0.02);
    sc.cfg.forcing = ForcingSpec(ConvergentToSteadyForcing{limit, transient, 0.25});
    sc.cfg.initial = stokes_steady(limit, sc.cfg.viscosity);
    sc.horizons = {25.0, 50.0, 100.0, 200.0};
    run_case(sc);
    std::printf("        [run] %-28s %6.1f s\n", sc.name.c_str(), sc.wall_seconds);

    std::vector<double> rel;
    for (const auto& rep : sc.reports)
        rel.push_back(rep.reynolds_residual_norm / rep.reynolds_residual_scale);
    c.require(rel.back() <= 1e-6, "relative residual %.3e <= 1e-6 at t=200", rel.back());
    bool mono = true;
    for (std::size_t i = 0; i + 1 < rel.size(); ++i) mono = mono && rel[i + 1] < rel[i];
    c.require(mono, "decreasing along horizons: %.2e > %.2e > %.2e > %.2e", rel[0], rel[1],
              rel[2], rel[3]);
    return c.ok;
}

// Criterion 8: ensemble Cesaro convergence and dissipativity.
bool criterion_8(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    auto lat = lat2d(64);
    EnsembleConfig cfg;
    cfg.lattice = lat;
    cfg.family.f_bar = scaled_mode(lat, {1, 0, 0}, 0.25);
    cfg.family.perturbation_amplitude = 5e-4;
    cfg.family.wavevector_schedule = {{0, 2, 0}, {3, 0, 0}, {0, 4, 0}, {5, 0, 0},
                                      {0, 6, 0}, {7, 0, 0}, {0, 8, 0}, {9, 0, 0}};
    cfg.n = 8;
    cfg.viscosity = 0.5;
    cfg.dt = 2.5e-3;
    cfg.horizon = 200.0;
    cfg.jobs = std::min(4u, std::max(1u, std::thread::hardware_concurrency()));
    auto res = run_ensemble(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("        [run] ensemble n=8 (%d jobs)        %6.1f s\n", cfg.jobs, wall);

    c.require(res.report.realizations_closed, "every realization closed its identity");
    c.require(res.report.force_bound_ok, "uniform bound on ||f^k||_{V'}");
    const auto& inc = res.report.cauchy_increments;  // m = 2..8
    bool mono = true;
    for (std::size_t m = 4; m <= 8; ++m)
        if (!(inc[m - 2] < inc[m - 3])) mono = false;
    c.require(mono, "increments strictly decreasing for n >= 4: %.2e %.2e %.2e %.2e %.2e",
              inc[2], inc[3], inc[4], inc[5], inc[6]);
    c.require(res.report.dissipativity_margin >= -res.report.tol_sign,
              "ensemble margin %.3e >= -%.3e", res.report.dissipativity_margin,
              res.report.tol_sign);
    c.require(res.report.vbar_v_worst <= res.report.vbar_v_bound,
              "max ||v_bar^k||_V %.3e <= bound %.3e", res.report.vbar_v_worst,
              res.report.vbar_v_bound);
    c.require(wall < 1200.0, "ensemble runtime %.0f s < 1200 s (parallel)", wall);
    return c.ok;
}

// Criterion 9: pointwise positive semidefiniteness of the Reynolds stress.
bool criterion_9(Check& c) {
    for (auto& sc : suite())
        for (std::size_t h = 0; h < sc.aggs.size(); ++h) {
            const auto& ck = sc.aggs[h].checks;
            c.require(ck.psd_min_eig >= -1e-10 * std::max(ck.psd_max_abs, 1e-30),
                      "%s t=%g: min eig %.3e >= -1e-10 max|R| (max|R| = %.3e)",
                      sc.name.c_str(), sc.horizons[h], ck.psd_min_eig, ck.psd_max_abs);
        }
    return c.ok;
}

// Criterion 10: byte-level determinism and checkpoint round trips.
bool criterion_10(Check& c) {
    const fs::path dir = fs::temp_directory_path() / "specbox_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string config_text = R"({
  "domain": {"dimension": 2, "resolution": 32},
  "physics": {"viscosity": 0.2},
  "time": {"dt": 0.005, "t_end": 5.0},
  "initial": {"kind": "random", "amplitude": 0.3, "seed": 12},
  "forcing": {"kind": "time_periodic",
              "base": {"modes": [{"wavevector": [1, 0], "amplitude": [[0.0, 0.0], [0.1, 0.0]]}]},
              "modulation": {"modes": [{"wavevector": [0, 1], "amplitude": [[0.08, 0.0], [0.0, 0.0]]}]},
              "angular_frequency": 2.0},
  "averaging": {"horizons": [2.5, 5.0]},
  "output": {"directory": "unused"}
})";
    auto cfg = parse_config(config_text);

    const auto out1 = (dir / "run1").string();
    const auto out2 = (dir / "run2").string();
    c.require(run_experiment(cfg, out1) == kOk, "first golden run succeeded");
    c.require(run_experiment(cfg, out2) == kOk, "second golden run succeeded");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    };
    c.require(slurp(fs::path(out1) / "series.csv") == slurp(fs::path(out2) / "series.csv"),
              "series.csv byte-identical across repeats");
    c.require(slurp(fs::path(out1) / "report.json") == slurp(fs::path(out2) / "report.json"),
              "report.json byte-identical across repeats");
    c.require(slurp(fs::path(out1) / "checkpoint_t5.chk") ==
                  slurp(fs::path(out2) / "checkpoint_t5.chk"),
              "checkpoints byte-identical across repeats");

    auto lattice = make_lattice(cfg.grid);
    auto state = read_checkpoint((fs::path(out1) / "checkpoint_t5.chk").string(), lattice);
    const auto rt = (dir / "roundtrip.chk").string();
    write_checkpoint(rt, state, cfg.grid, cfg.to_json());
    auto state2 = read_checkpoint(rt, lattice);
    c.require(state.v.raw() == state2.v.raw() && state.t == state2.t &&
                  state.integrals.dissipation == state2.integrals.dissipation,
              "checkpoint round trip bit-exact");

    c.require(verify_reports(out1) == kOk, "verify accepts the golden report");
    fs::remove_all(dir);
    return c.ok;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    struct Entry {
        int id;
        const char* name;
        std::function<bool(Check&)> fn;
    };
    const std::vector<Entry> entries = {
        {1, "analytic-solution fidelity (Stokes, Taylor-Green)", criterion_1},
        {2, "energy-balance residual and refinement order", criterion_2},
        {3, "a-priori energy/dissipation/window bounds (6-case suite)", criterion_3},
        {4, "averaged-operator bounds at every dyadic horizon", criterion_4},
        {5, "exact finite-t Reynolds identities", criterion_5},
        {6, "dissipation closure and attracted-to-steady dissipativity", criterion_6},
        {7, "Reynolds weak residual, decreasing in t", criterion_7},
        {8, "ensemble Cesaro convergence and dissipativity", criterion_8},
        {9, "pointwise PSD of the Reynolds stress", criterion_9},
        {10, "byte-level determinism and checkpoint round trip", criterion_10},
    };

    int failures = 0;
    for (const auto& e : entries) {
        if (!wanted.empty() && !wanted.count(e.id)) continue;
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = e.fn(c);
        } catch (const std::exception& ex) {
            c.detail << "        exception: " << ex.what() << "\n";
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %2d (%7.1f s): %s\n", ok ? "PASS" : "FAIL", e.id, wall,
                    e.name);
        std::fputs(c.detail.str().c_str(), stdout);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
