#pragma once

#include "specbox/field.hpp"
#include "specbox/forcing.hpp"
#include "specbox/spectral_ops.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace specbox {

/// Data (v0, f, nu) plus discretization choices for one run.
struct SolverConfig {
    LatticePtr lattice;
    double viscosity = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    ForcingSpec forcing;
    SpectralField initial;
    std::uint64_t sample_stride = 1;

    std::uint64_t step_count() const {
        return static_cast<std::uint64_t>(std::llround(t_end / dt));
    }
    /// Checks the numeric preconditions including the CFL guard
    /// dt <= 0.5 (L/N) / max(1, max speed of the initial field).
    std::vector<ConfigViolation> validate() const;
};

/// Running integrals advanced with the RK4 stage quadrature, so they carry
/// the same fourth-order accuracy as the trajectory.
struct RunningIntegrals {
    double dissipation = 0.0;  // int_0^t ||grad v||^2 ds
    double work = 0.0;         // int_0^t <f, v> ds
};

struct SolverState {
    double t = 0.0;
    std::uint64_t step = 0;
    SpectralField v;
    RunningIntegrals integrals;
};

/// Non-finite coefficients were produced; carries the last finite state.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(SolverState last_finite, double detected_at)
        : std::runtime_error("solver blow-up detected at t = " + std::to_string(detected_at)),
          last_finite_(std::move(last_finite)), detected_at_(detected_at) {}

    const SolverState& last_finite() const { return last_finite_; }
    double detected_at() const { return detected_at_; }

    /// Scalar series sampled before the failure, attached by run().
    std::vector<std::array<double, 7>> diagnostic_series;

private:
    SolverState last_finite_;
    double detected_at_;
};

/// One row of the sampled scalar series.
struct ScalarSample {
    double t = 0.0;
    double energy = 0.0;     // ||v||^2
    double grad_sq = 0.0;    // ||grad v||^2
    double work_rate = 0.0;  // <f(t), v(t)>
    double f_dual_sq = 0.0;  // ||f(t)||^2_{V'}
    double dissipation_integral = 0.0;
    double work_integral = 0.0;
};

struct SampleSeries {
    double dt = 0.0;  // sample spacing
    std::vector<ScalarSample> rows;
};

/// Full view handed to observers at sample times. References stay valid only
/// during the callback.
struct Sample {
    const ScalarSample& scalars;
    const SolverState& state;
    const SpectralField& f_hat;   // f(t)
    const SpectralField& nl_hat;  // P div(v (x) v) at t
    const PhysicalField& v_phys;  // physical samples of v(t)
};

using SampleObserver = std::function<void(const Sample&)>;

/// Integrating-factor RK4 stepper: the viscous factor e^{-nu kappa^2 dt} is
/// exact per mode, the projected nonlinearity and forcing go through the
/// classical RK4 stages.
class Stepper {
public:
    explicit Stepper(const SolverConfig& config);

    const SolverState& state() const { return state_; }
    const SolverConfig& config() const { return *config_; }

    /// Advances one dt. Throws BlowUpError on non-finite coefficients.
    void step();

    /// Refreshes f(t), NL(v(t)) and the physical samples for the current
    /// state, reusing them for the next step's first stage.
    void prepare_sample();
    ScalarSample scalars() const;
    const SpectralField& f_current() const { return f_cur_; }
    const SpectralField& nl_current() const { return nl_cur_; }
    const PhysicalField& v_physical() const { return v_phys_; }

private:
    void eval_rhs(const SpectralField& u, const SpectralField& f, SpectralField& out,
                  PhysicalField* phys);

    const SolverConfig* config_;
    SpectralOps ops_;
    SolverState state_;
    std::vector<double> exp_full_, exp_half_;  // masked viscous factors
    SpectralField f_cur_, f_mid_, f_end_;
    SpectralField nl_cur_, stage_u_, stage_k_, acc_, v_next_;
    PhysicalField v_phys_;
    bool sample_fresh_ = false;
};

struct RunResult {
    SolverState final_state;
    SampleSeries series;
};

/// Drives the stepper from t = 0 to t_end, emitting samples every
/// sample_stride steps (t = 0 and t = t_end always included).
RunResult run(const SolverConfig& config, const std::vector<SampleObserver>& observers = {});

/// Per-interval residuals of the discrete energy balance
/// 1/2 d||v||^2/dt + nu ||grad v||^2 = <f, v> over the sampled series.
std::vector<double> energy_residual(const SampleSeries& series, double nu);

/// One verdict of an a-priori bound with its measured slack (bound - value,
/// minimized over the samples it applies to).
struct BoundVerdict {
    bool ok = false;
    double slack = 0.0;
    double bound = 0.0;
    double worst_value = 0.0;
};

struct AprioriVerdicts {
    BoundVerdict energy;       // ||v(t)||^2 <= ||v0||^2 + (3 + C/nu) F^2/nu
    BoundVerdict dissipation;  // nu int ||grad v||^2 <= ||v0||^2 + ([t]+1) F^2/nu
    BoundVerdict window;       // unit-window energy inequality
    bool all_ok() const { return energy.ok && dissipation.ok && window.ok; }
};

AprioriVerdicts verify_apriori_bounds(const SampleSeries& series, double uloc_norm, double nu,
                                      double poincare_const, double v0_sq);

/// Checkpoint format: text header (version, config echo, t, step, running
/// integrals, grid) followed by little-endian 64-bit floats for re/im of
/// every retained coefficient in lexicographic wavevector order.
void write_checkpoint(const std::string& path, const SolverState& state, const GridSpec& grid,
                      const std::string& config_echo);

struct CheckpointInfo {
    int version = 0;
    std::string config_echo;
    double t = 0.0;
    std::uint64_t step = 0;
    RunningIntegrals integrals;
    GridSpec grid;
    std::size_t value_count = 0;
};

CheckpointInfo read_checkpoint_info(const std::string& path);
SolverState read_checkpoint(const std::string& path, LatticePtr lattice);

} // namespace specbox
