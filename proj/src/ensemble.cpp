#include "specbox/ensemble.hpp"

#include "specbox/presets.hpp"

#include <json.hpp>

#include <cmath>
#include <future>

namespace specbox {

std::vector<ForcingSpec> generate_family(const ForceFamily& family, int n) {
    if (n < 1) throw std::domain_error("generate_family: n must be >= 1");
    if (static_cast<int>(family.wavevector_schedule.size()) < n)
        throw std::domain_error("generate_family: wavevector schedule is shorter than n");
    for (int k = 0; k + 1 < n; ++k) {
        auto mag = [&](int i) {
            const auto& q = family.wavevector_schedule[static_cast<std::size_t>(i)];
            return static_cast<long>(q[0]) * q[0] + static_cast<long>(q[1]) * q[1] +
                   static_cast<long>(q[2]) * q[2];
        };
        if (mag(k + 1) < mag(k))
            throw std::domain_error("generate_family: |q_k| must be nondecreasing");
    }
    const auto lattice = family.f_bar.lattice();
    std::vector<ForcingSpec> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        SpectralField f = family.f_bar;
        SpectralField mode = unit_mode(lattice, family.wavevector_schedule[static_cast<std::size_t>(k)]);
        f.axpy(family.perturbation_amplitude, mode);
        out.emplace_back(SteadyForcing{std::move(f)});
    }
    return out;
}

std::vector<SpectralField> cesaro(const std::vector<SpectralField>& fields) {
    if (fields.empty()) throw std::domain_error("cesaro: empty input");
    std::vector<SpectralField> out;
    out.reserve(fields.size());
    SpectralField sum(fields.front().lattice());
    for (std::size_t k = 0; k < fields.size(); ++k) {
        sum.axpy(1.0, fields[k]);
        SpectralField s = sum;
        s.scale(1.0 / static_cast<double>(k + 1));
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

struct Realization {
    ReynoldsAggregate aggregate;
    ReynoldsReport report;
};

Realization run_one(const EnsembleConfig& cfg, const ForcingSpec& forcing) {
    SolverConfig sc;
    sc.lattice = cfg.lattice;
    sc.viscosity = cfg.viscosity;
    sc.dt = cfg.dt;
    sc.t_end = cfg.horizon;
    sc.sample_stride = cfg.sample_stride;
    sc.forcing = forcing;
    sc.initial = SpectralField(cfg.lattice);  // v0 = 0: the mean forgets the datum

    TimeAverager avg(cfg.lattice);
    std::vector<SampleObserver> obs = {[&](const Sample& s) { avg.accumulate(s); }};
    run(sc, obs);

    Realization r;
    r.aggregate = avg.finalize(cfg.viscosity);
    const double F = std::sqrt(forcing.dual_norm_sq_at(0.0));  // steady: uloc = dual norm
    r.report = make_report(r.aggregate, F);
    r.report.mt_bounds = avg.mt_operator_bound_check(F, cfg.viscosity);
    return r;
}

} // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
    const auto family = generate_family(cfg.family, cfg.n);
    const auto& lat = *cfg.lattice;

    std::vector<Realization> reals(static_cast<std::size_t>(cfg.n));
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int k = 0; k < cfg.n; ++k) {
            try {
                reals[static_cast<std::size_t>(k)] = run_one(cfg, family[static_cast<std::size_t>(k)]);
            } catch (const std::exception& e) {
                throw EnsembleError(k, e.what());
            }
        }
    } else {
        std::vector<std::future<Realization>> futs;
        futs.reserve(static_cast<std::size_t>(cfg.n));
        for (int k = 0; k < cfg.n; ++k)
            futs.push_back(std::async(std::launch::async, [&, k] {
                return run_one(cfg, family[static_cast<std::size_t>(k)]);
            }));
        for (int k = 0; k < cfg.n; ++k) {
            try {
                reals[static_cast<std::size_t>(k)] = futs[static_cast<std::size_t>(k)].get();
            } catch (const std::exception& e) {
                throw EnsembleError(k, e.what());
            }
        }
    }

    EnsembleResult out;
    out.report.n = cfg.n;
    for (const auto& r : reals) {
        out.v_bars.push_back(r.aggregate.v_bar);
        out.realization_reports.push_back(r.report);
        if (!r.report.closure_ok()) out.report.realizations_closed = false;
    }
    out.cesaro_means = cesaro(out.v_bars);

    // Strong V' convergence of the force Cesaro means, by direct norm.
    const double fbar_dual = std::sqrt(norms(cfg.family.f_bar).dual_sq);
    bool bound_ok = true;
    SpectralField fsum(cfg.lattice);
    for (int k = 0; k < cfg.n; ++k) {
        const auto& fk = std::get<SteadyForcing>(family[static_cast<std::size_t>(k)].kind()).base;
        SpectralField d = fk;
        d.axpy(-1.0, cfg.family.f_bar);
        out.report.member_distances.push_back(std::sqrt(norms(d).dual_sq));
        if (std::sqrt(norms(fk).dual_sq) >
            fbar_dual + std::abs(cfg.family.perturbation_amplitude) + 1e-12)
            bound_ok = false;
        fsum.axpy(1.0, fk);
        SpectralField mean = fsum;
        mean.scale(1.0 / static_cast<double>(k + 1));
        mean.axpy(-1.0, cfg.family.f_bar);
        out.report.force_cesaro_distance.push_back(std::sqrt(norms(mean).dual_sq));
    }
    out.report.force_bound_ok = bound_ok;

    for (std::size_t m = 1; m < out.cesaro_means.size(); ++m) {
        SpectralField d = out.cesaro_means[m];
        d.axpy(-1.0, out.cesaro_means[m - 1]);
        out.report.cauchy_increments.push_back(std::sqrt(norms(d).grad_sq));
    }

    // Uniform bound on the realization means (v0 = 0).
    double fmax = 0.0;
    for (const auto& r : out.realization_reports) fmax = std::max(fmax, r.uloc_norm);
    out.report.vbar_v_bound = std::sqrt(2.0) * fmax / cfg.viscosity;
    for (const auto& r : reals)
        out.report.vbar_v_worst =
            std::max(out.report.vbar_v_worst, std::sqrt(norms(r.aggregate.v_bar).grad_sq));

    // Ensemble stress work (div <R>_n, S_n) = (<B>_n - (S_n . grad) S_n, S_n),
    // and the dissipativity margin including the finite-t remainders.
    const SpectralField& s_n = out.cesaro_means.back();
    SpectralField b_mean(cfg.lattice);
    double rho_mean = 0.0, flux_mean = 0.0, eps_mean = 0.0;
    for (const auto& r : reals) {
        b_mean.axpy(1.0 / static_cast<double>(cfg.n), r.aggregate.B);
        rho_mean += r.report.dissipation.rho / cfg.n;
        flux_mean += r.report.dissipation.flux_turb / cfg.n;
        eps_mean += r.report.dissipation.eps / cfg.n;
    }
    SpectralOps ops(cfg.lattice);
    SpectralField f_ens = b_mean;
    f_ens.axpy(-1.0, ops.nonlinear_term(s_n));
    out.report.ensemble_stress_work = inner_h(f_ens, s_n);

    const double vol = lat.volume();
    out.report.dissipativity_margin =
        (out.report.ensemble_stress_work + rho_mean + flux_mean) / vol;
    const double scale = std::max({eps_mean, cfg.viscosity * norms(s_n).grad_sq,
                                   std::abs(out.report.ensemble_stress_work)});
    out.report.tol_sign = 1e-8 * scale / vol;
    return out;
}

std::string ensemble_to_json(const EnsembleReport& r, int indent) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["force_cesaro_distance"] = r.force_cesaro_distance;
    j["member_distances"] = r.member_distances;
    j["force_bound_ok"] = r.force_bound_ok;
    j["cauchy_increments"] = r.cauchy_increments;
    j["vbar_v_worst"] = r.vbar_v_worst;
    j["vbar_v_bound"] = r.vbar_v_bound;
    j["ensemble_stress_work"] = r.ensemble_stress_work;
    j["dissipativity_margin"] = r.dissipativity_margin;
    j["tol_sign"] = r.tol_sign;
    j["realizations_closed"] = r.realizations_closed;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

} // namespace specbox
