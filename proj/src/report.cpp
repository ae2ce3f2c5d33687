#include "specbox/report.hpp"

#include <json.hpp>

#include <cmath>

namespace specbox {

namespace {

/// (v_start - v_end)/t as a field: the finite-t boundary term.
SpectralField boundary_term(const ReynoldsAggregate& agg) {
    SpectralField b = agg.v_start;
    b.axpy(-1.0, agg.v_end);
    b.scale(1.0 / agg.t);
    return b;
}

SpectralField laplacian_term(const ReynoldsAggregate& agg) {
    SpectralField lap(agg.v_bar.lattice());
    const auto& lat = *agg.v_bar.lattice();
    for (const auto& m : lat.retained())
        for (int c = 0; c < agg.v_bar.dim(); ++c)
            lap.at(c, m.index) = agg.nu * m.kappa_sq * agg.v_bar.at(c, m.index);
    return lap;
}

} // namespace

std::pair<double, double> reynolds_residual(const ReynoldsAggregate& agg) {
    SpectralOps ops(agg.v_bar.lattice());
    SpectralField lap = laplacian_term(agg);
    SpectralField nl_bar = ops.nonlinear_term(agg.v_bar);
    SpectralField div_r = ops.div_tensor(agg.R);
    SpectralField bdry = boundary_term(agg);

    SpectralField r = lap;
    r.axpy(1.0, nl_bar);
    r.axpy(1.0, div_r);
    r.axpy(-1.0, agg.f_bar);
    r.axpy(-1.0, bdry);

    const double scale =
        std::max({std::sqrt(norms(lap).dual_sq),
                  std::sqrt(norms(nl_bar).dual_sq) + std::sqrt(norms(div_r).dual_sq),
                  std::sqrt(norms(agg.f_bar).dual_sq), std::sqrt(norms(bdry).dual_sq)});
    return {std::sqrt(norms(r).dual_sq), scale};
}

std::pair<double, double> mean_energy_balance(const ReynoldsAggregate& agg) {
    const double grad = norms(agg.v_bar).grad_sq;
    const double work = inner_h(agg.f_bar, agg.v_bar);
    const double bdry = inner_h(boundary_term(agg), agg.v_bar);
    const double r = agg.nu * grad + agg.stress_work - work - bdry;
    const double scale =
        std::max({agg.nu * grad, std::abs(agg.stress_work), std::abs(work), std::abs(bdry)});
    return {r, scale};
}

DissipationRecord dissipation_inequality(const ReynoldsAggregate& agg) {
    DissipationRecord d;
    d.eps = agg.eps;
    d.stress_work = agg.stress_work;
    d.flux_turb = agg.flux_turb;
    d.rho = (agg.v_start_sq - agg.v_end_sq) / (2.0 * agg.t) -
            inner_h(boundary_term(agg), agg.v_bar);
    d.margin = d.stress_work + d.flux_turb + d.rho - d.eps;
    return d;
}

BoussinesqFit boussinesq_fit(const ReynoldsAggregate& agg) {
    const auto& lat = *agg.v_bar.lattice();
    const int d = lat.dim();
    const std::size_t np = lat.points();
    SpectralOps ops(agg.v_bar.lattice());
    std::vector<std::vector<double>> grad;
    ops.gradient_physical(agg.v_bar, grad);

    // Model columns over the full d x d tensor at every point:
    // A1 = -(grad v + grad v^T)/2, A2 = (2/3) Id.
    double g11 = 0.0, g12 = 0.0, g22 = 0.0, b1 = 0.0, b2 = 0.0, r_norm_sq = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double s =
                    0.5 * (grad[static_cast<std::size_t>(d * i + j)][p] +
                           grad[static_cast<std::size_t>(d * j + i)][p]);
                const double a1 = -s;
                const double a2 = i == j ? 2.0 / 3.0 : 0.0;
                const double r = agg.R.entry(i, j, p);
                g11 += a1 * a1;
                g12 += a1 * a2;
                g22 += a2 * a2;
                b1 += a1 * r;
                b2 += a2 * r;
                r_norm_sq += r * r;
            }
    }
    BoussinesqFit fit;
    if (r_norm_sq == 0.0) return fit;

    const double det = g11 * g22 - g12 * g12;
    if (g11 <= 1e-28 * g22 || det <= 1e-28 * g11 * g22) {
        // Degenerate mean gradient: fit the isotropic part only.
        fit.nu_t = 0.0;
        fit.k0 = g22 > 0.0 ? b2 / g22 : 0.0;
    } else {
        fit.nu_t = (g22 * b1 - g12 * b2) / det;
        fit.k0 = (g11 * b2 - g12 * b1) / det;
    }

    double resid_sq = 0.0;
    for (std::size_t p = 0; p < np; ++p)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double s =
                    0.5 * (grad[static_cast<std::size_t>(d * i + j)][p] +
                           grad[static_cast<std::size_t>(d * j + i)][p]);
                const double model = -fit.nu_t * s + (i == j ? 2.0 / 3.0 * fit.k0 : 0.0);
                const double e = agg.R.entry(i, j, p) - model;
                resid_sq += e * e;
            }
    fit.relative_misfit = std::sqrt(resid_sq / r_norm_sq);
    return fit;
}

ReynoldsReport make_report(const ReynoldsAggregate& agg, double uloc_norm) {
    ReynoldsReport rep;
    rep.t = agg.t;
    rep.nu = agg.nu;
    rep.uloc_norm = uloc_norm;

    auto [rr, rr_scale] = reynolds_residual(agg);
    rep.reynolds_residual_norm = rr;
    rep.reynolds_residual_scale = rr_scale;
    auto [me, me_scale] = mean_energy_balance(agg);
    rep.mean_energy_residual = me;
    rep.mean_energy_scale = me_scale;

    rep.dissipation = dissipation_inequality(agg);
    rep.boussinesq = boussinesq_fit(agg);
    rep.checks = agg.checks;

    const auto nb = norms(agg.v_bar);
    rep.v_bar_grad_norm = std::sqrt(nb.grad_sq);
    double ksum = 0.0;
    for (double k : agg.k_field) ksum += k;
    rep.mean_k = agg.k_field.empty() ? 0.0 : ksum / static_cast<double>(agg.k_field.size());

    // Quadrature-level defect of the trapezoid energy identity; the closure
    // tolerance is calibrated from it plus the momentum-residual pairing bound.
    const double defect_total = 0.5 * (agg.v_end_sq - agg.v_start_sq) +
                                agg.nu * agg.mt_grad_sq * agg.t - agg.mt_work * agg.t;
    rep.trap_energy_defect_rate = std::abs(defect_total) / agg.t;

    const double scale =
        std::max({std::abs(agg.eps), agg.nu * agg.mt_grad_sq, std::abs(agg.mt_work), 1e-300});
    rep.tol_identity =
        std::max(1e-8 * scale, 10.0 * (rep.trap_energy_defect_rate + rr * rep.v_bar_grad_norm));
    rep.tol_sign = 1e-8 * std::max(std::abs(agg.eps), agg.nu * nb.grad_sq);
    return rep;
}

std::string report_to_json(const ReynoldsReport& r, int indent) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["nu"] = r.nu;
    j["uloc_norm"] = r.uloc_norm;
    j["reynolds_residual"] = {{"norm", r.reynolds_residual_norm},
                              {"scale", r.reynolds_residual_scale}};
    j["mean_energy_balance"] = {{"residual", r.mean_energy_residual},
                                {"scale", r.mean_energy_scale}};
    j["dissipation"] = {{"eps", r.dissipation.eps},
                        {"stress_work", r.dissipation.stress_work},
                        {"flux_turb", r.dissipation.flux_turb},
                        {"rho", r.dissipation.rho},
                        {"margin", r.dissipation.margin}};
    j["tol_identity"] = r.tol_identity;
    j["tol_sign"] = r.tol_sign;
    j["trap_energy_defect_rate"] = r.trap_energy_defect_rate;
    j["boussinesq"] = {{"nu_t", r.boussinesq.nu_t},
                       {"k0", r.boussinesq.k0},
                       {"relative_misfit", r.boussinesq.relative_misfit}};
    j["identity_checks"] = {{"reynolds_decomposition", r.checks.reynolds_decomposition},
                            {"orthogonality", r.checks.orthogonality},
                            {"flux_decomposition", r.checks.flux_decomposition},
                            {"f_equals_div_r", r.checks.f_equals_div_r},
                            {"integration_by_parts", r.checks.integration_by_parts},
                            {"orthogonality_raw", r.checks.orthogonality_raw},
                            {"psd_min_eig", r.checks.psd_min_eig},
                            {"psd_max_abs", r.checks.psd_max_abs}};
    auto verdict = [](const BoundVerdict& b) {
        return nlohmann::ordered_json{
            {"ok", b.ok}, {"slack", b.slack}, {"bound", b.bound}, {"value", b.worst_value}};
    };
    j["mt_bounds"] = {{"applicable", r.mt_bounds.applicable},
                      {"mean_force", verdict(r.mt_bounds.mean_force)},
                      {"mean_gradient", verdict(r.mt_bounds.mean_gradient)},
                      {"mean_force_sq", verdict(r.mt_bounds.mean_force_sq)},
                      {"mean_work", verdict(r.mt_bounds.mean_work)}};
    j["v_bar_grad_norm"] = r.v_bar_grad_norm;
    j["mean_k"] = r.mean_k;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

} // namespace specbox
