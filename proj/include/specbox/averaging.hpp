#pragma once

#include "specbox/solver.hpp"

#include <optional>

namespace specbox {

/// Everything M_t produces at one horizon, with fluctuation quantities
/// reconstructed by difference (never accumulated directly).
struct ReynoldsAggregate {
    double t = 0.0;   // averaging span
    double nu = 0.0;
    SpectralField v_bar;   // M_t(v)
    SpectralField f_bar;   // M_t(f)
    SpectralField B;       // M_t((v . grad) v)
    SpectralField F;       // B - (v_bar . grad) v_bar
    SymTensorField R;      // M_t(v (x) v) - v_bar (x) v_bar, physical points
    std::vector<double> k_field;  // 1/2 trace R per grid point

    double mt_grad_sq = 0.0;   // M_t ||grad v||^2
    double mt_work = 0.0;      // M_t <f, v>
    double mt_f_dual_sq = 0.0; // M_t ||f||^2_{V'}
    double eps = 0.0;          // nu (M_t ||grad v||^2 - ||grad v_bar||^2), raw
    double flux_turb = 0.0;    // M_t<f,v> - <f_bar, v_bar>

    // Boundary data for the finite-t remainder terms.
    double v_start_sq = 0.0, v_end_sq = 0.0;
    SpectralField v_start, v_end;

    /// Cross-route closures measured at finalize time (relative values).
    struct IdentityChecks {
        double reynolds_decomposition = 0.0;  // reconstruction vs Welford R
        double orthogonality = 0.0;           // grad fluctuation, two routes
        double flux_decomposition = 0.0;      // flux covariance, two routes
        double f_equals_div_r = 0.0;          // ||F - div R|| / ||F||
        double integration_by_parts = 0.0;    // (div R, v_bar) vs -(R, grad v_bar)
        double orthogonality_raw = 0.0;       // M_t||grad v||^2 - ||grad v_bar||^2
        double psd_min_eig = 0.0;
        double psd_max_abs = 0.0;
    } checks;

    double stress_work = 0.0;  // (div R, v_bar)
};

/// Verdicts of the averaged-operator bounds that require t >= 1.
struct MtBoundVerdicts {
    bool applicable = false;  // t_accum >= 1
    BoundVerdict mean_force;      // ||M_t f||_{V'} <= 2 F
    BoundVerdict mean_gradient;   // M_t ||grad v||^2 <= ||v0||^2/(nu t) + 2 F^2/nu^2
    BoundVerdict mean_force_sq;   // M_t ||f||^2_{V'} <= 2 F^2
    BoundVerdict mean_work;       // |M_t <f,v>| <= sqrt(2) F sqrt(...)
    bool all_ok() const {
        return applicable && mean_force.ok && mean_gradient.ok && mean_force_sq.ok &&
               mean_work.ok;
    }
};

/// Streaming trapezoid averager. All accumulators share one weight set, so
/// the finite-t Reynolds identities close exactly. A parallel set of Welford
/// central-moment accumulators provides an independent arithmetic route
/// through the same weights for the identity cross-checks.
class TimeAverager {
public:
    explicit TimeAverager(LatticePtr lattice);

    /// Feeds one sample; t must increase strictly with uniform spacing.
    void accumulate(const Sample& s);
    void accumulate(double t, const SpectralField& v, const SpectralField& f,
                    const SpectralField& nl, const PhysicalField& v_phys, double grad_sq,
                    double work_rate, double f_dual_sq);

    std::size_t sample_count() const { return count_; }
    double t_accum() const { return count_ >= 2 ? t_last_ - t_first_ : 0.0; }
    double t_start() const { return t_first_; }
    double t_end() const { return t_last_; }
    const LatticePtr& lattice() const { return lattice_; }

    /// M_t(v). Throws EmptyAverageError when t_accum == 0.
    SpectralField mean_v() const;
    SpectralField mean_f() const;

    ReynoldsAggregate finalize(double nu) const;
    MtBoundVerdicts mt_operator_bound_check(double uloc_norm, double nu) const;

    /// Joins averagers over adjacent ranges sharing the junction sample.
    static TimeAverager merge(const TimeAverager& a, const TimeAverager& b);

private:
    void welford_update(double w, const PhysicalField& v_phys, const SpectralField& v,
                        const SpectralField& f);

    LatticePtr lattice_;
    std::size_t count_ = 0;
    double t_first_ = 0.0, t_last_ = 0.0, h_ = 0.0;

    // Trapezoid integrals (the eight shared-weight accumulators).
    SpectralField acc_v_, acc_f_, acc_nl_;
    SymTensorField acc_vv_;
    double acc_grad_sq_ = 0.0, acc_work_ = 0.0, acc_f_dual_sq_ = 0.0;

    // Previous sample (trapezoid needs both interval endpoints).
    SpectralField prev_v_, prev_f_, prev_nl_;
    PhysicalField prev_v_phys_;
    double prev_grad_sq_ = 0.0, prev_work_ = 0.0, prev_f_dual_sq_ = 0.0;

    // First/last samples for the boundary terms.
    SpectralField first_v_, last_v_;

    // Welford state: weighted means and central moments.
    double wsum_ = 0.0;
    PhysicalField wf_mean_vphys_;
    SpectralField wf_mean_v_, wf_mean_f_;
    SymTensorField wf_s_vv_;
    double wf_s_grad_ = 0.0, wf_s_flux_ = 0.0;
};

/// Cauchy increments ||v_bar(t_{i+1}) - v_bar(t_i)||_V along a horizon list.
std::vector<double> mean_convergence_increments(const std::vector<ReynoldsAggregate>& aggs);

} // namespace specbox
