#pragma once

#include "specbox/averaging.hpp"

#include <string>

namespace specbox {

/// The five terms of the finite-t dissipation identity
/// eps = stress_work + flux_turb + rho, with the signed closure margin.
struct DissipationRecord {
    double eps = 0.0;
    double stress_work = 0.0;
    double flux_turb = 0.0;
    double rho = 0.0;     // boundary remainder, O(1/t)
    double margin = 0.0;  // stress_work + flux_turb + rho - eps
};

struct BoussinesqFit {
    double nu_t = 0.0;
    double k0 = 0.0;
    double relative_misfit = 0.0;
};

/// Verdict record for one horizon of one run.
struct ReynoldsReport {
    double t = 0.0;
    double nu = 0.0;
    double uloc_norm = 0.0;

    double reynolds_residual_norm = 0.0;  // V' norm of the mean-momentum residual
    double reynolds_residual_scale = 0.0; // max V' norm among its terms
    double mean_energy_residual = 0.0;
    double mean_energy_scale = 0.0;

    DissipationRecord dissipation;
    double tol_identity = 0.0;
    double tol_sign = 0.0;
    double trap_energy_defect_rate = 0.0;  // measured quadrature-level defect

    BoussinesqFit boussinesq;
    ReynoldsAggregate::IdentityChecks checks;
    MtBoundVerdicts mt_bounds;

    double v_bar_grad_norm = 0.0;  // ||grad v_bar||
    double mean_k = 0.0;           // volume average of the k field

    bool closure_ok() const { return std::abs(dissipation.margin) <= tol_identity; }
};

/// V' norm of nu A v_bar + P div(v_bar (x) v_bar + R) - f_bar - (v0 - v(t))/t,
/// together with the largest term norm for a relative reading.
std::pair<double, double> reynolds_residual(const ReynoldsAggregate& agg);

/// Residual of nu ||grad v_bar||^2 + (div R, v_bar) - <f_bar, v_bar>
/// - ((v0 - v(t))/t, v_bar), with its scale.
std::pair<double, double> mean_energy_balance(const ReynoldsAggregate& agg);

DissipationRecord dissipation_inequality(const ReynoldsAggregate& agg);

/// Least-squares fit of R ~ -nu_t (grad v_bar + grad v_bar^T)/2 + (2/3) k0 Id
/// over all grid points.
BoussinesqFit boussinesq_fit(const ReynoldsAggregate& agg);

/// Assembles the full verdict record for one finalized horizon.
ReynoldsReport make_report(const ReynoldsAggregate& agg, double uloc_norm);

/// JSON body of one report (schema "specbox-report-1" fragments).
std::string report_to_json(const ReynoldsReport& report, int indent = -1);

} // namespace specbox
