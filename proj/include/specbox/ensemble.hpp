#pragma once

#include "specbox/report.hpp"

namespace specbox {

/// Family of steady forces f^k = f_bar + amplitude * e_{q_k} whose Cesaro
/// means converge strongly in V' by construction.
struct ForceFamily {
    SpectralField f_bar;
    double perturbation_amplitude = 0.0;
    std::vector<std::array<int, 3>> wavevector_schedule;
    std::uint64_t seed = 0;
};

/// A realization blew up; carries which one.
class EnsembleError : public std::runtime_error {
public:
    EnsembleError(int index, const std::string& what)
        : std::runtime_error("realization " + std::to_string(index) + ": " + what),
          index_(index) {}
    int index() const { return index_; }

private:
    int index_;
};

std::vector<ForcingSpec> generate_family(const ForceFamily& family, int n);

/// Running arithmetic means S_m = (1/m) sum_{k<=m} of the inputs.
std::vector<SpectralField> cesaro(const std::vector<SpectralField>& fields);

struct EnsembleConfig {
    LatticePtr lattice;
    ForceFamily family;
    int n = 4;
    double viscosity = 0.5;
    double dt = 2.5e-3;
    double horizon = 100.0;
    std::uint64_t sample_stride = 1;
    int jobs = 1;  // realizations run in parallel; reduction stays ordered
};

struct EnsembleReport {
    int n = 0;
    /// ||(1/m) sum f^k - f_bar||_{V'} for m = 1..n (strong convergence).
    std::vector<double> force_cesaro_distance;
    /// ||f^k - f_bar||_{V'} for each member (decreasing by construction).
    std::vector<double> member_distances;
    bool force_bound_ok = false;  // every ||f^k||_{V'} <= ||f_bar||_{V'} + amplitude
    /// ||S_m - S_{m-1}||_V for m = 2..n.
    std::vector<double> cauchy_increments;
    /// max_k ||v_bar^k||_V against the bound sqrt(2) F_max / nu (v0 = 0).
    double vbar_v_worst = 0.0;
    double vbar_v_bound = 0.0;
    /// (div <R>_n, S_n) computed as (<B>_n - (S_n . grad) S_n, S_n).
    double ensemble_stress_work = 0.0;
    /// (stress work + Cesaro mean of the per-realization remainders) / |Omega|.
    double dissipativity_margin = 0.0;
    double tol_sign = 0.0;
    bool realizations_closed = true;  // every per-run identity closure passed
};

struct EnsembleResult {
    EnsembleReport report;
    std::vector<ReynoldsReport> realization_reports;
    std::vector<SpectralField> v_bars;
    std::vector<SpectralField> cesaro_means;
};

EnsembleResult run_ensemble(const EnsembleConfig& config);

std::string ensemble_to_json(const EnsembleReport& report, int indent = -1);

} // namespace specbox
