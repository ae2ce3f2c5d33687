#pragma once

#include "specbox/field.hpp"
#include "specbox/spectral_ops.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace specbox {

/// f(t) = base.
struct SteadyForcing {
    SpectralField base;
};

/// f(t) = limit + e^{-rate t} transient; the family satisfying the
/// attracted-to-steady hypothesis with explicit rate.
struct ConvergentToSteadyForcing {
    SpectralField limit;
    SpectralField transient;
    double rate = 1.0;
};

/// f(t) = base + cos(angular_frequency t) modulation.
struct TimePeriodicForcing {
    SpectralField base;
    SpectralField modulation;
    double angular_frequency = 1.0;
};

/// f(t) = pulse while (t mod period) < pulse_width, else zero. Uniformly
/// locally square-integrable but nowhere convergent.
struct BurstsForcing {
    SpectralField pulse;
    double pulse_width = 0.25;  // in (0, 1]
    double period = 1.0;        // >= 1
};

/// Sparse set of divergence-free modes with piecewise-linear random phases,
/// knots spaced correlation_time apart. Deterministic in (seed, t).
struct RandomPhasesForcing {
    struct Mode {
        std::array<int, 3> wavevector;
        double amplitude;
    };
    std::vector<Mode> modes;
    double correlation_time = 1.0;
    std::uint64_t seed = 0;
    LatticePtr lattice;
};

/// Tagged description of a time-dependent force program in L^2_uloc(R+; V').
class ForcingSpec {
public:
    using Kind = std::variant<SteadyForcing, ConvergentToSteadyForcing, TimePeriodicForcing,
                              BurstsForcing, RandomPhasesForcing>;

    ForcingSpec() = default;
    explicit ForcingSpec(Kind kind);

    const Kind& kind() const { return kind_; }
    const LatticePtr& lattice() const { return lattice_; }

    /// Violations against the family invariants (empty when valid).
    std::vector<ConfigViolation> validate(const std::string& path_prefix = "forcing") const;

    /// f(t) as a fresh field. Throws std::domain_error for t < 0.
    SpectralField evaluate(double t) const;
    /// Allocation-free variant for hot loops.
    void evaluate_into(double t, SpectralField& out) const;

    /// ||f(t)||^2 in V', via the per-family closed form.
    double dual_norm_sq_at(double t) const;

    /// Sliding-window sup of the trapezoid estimate of
    /// int_t^{t+1} ||f||^2_{V'} ds for window starts on the quadrature grid in
    /// [0, horizon - 1]. Monotone nondecreasing in horizon.
    double uloc_norm_sq(double horizon, double quadrature_dt = 1e-2) const;
    /// sqrt of the above: the scalar F of the a-priori bounds.
    double uloc_norm(double horizon, double quadrature_dt = 1e-2) const {
        return std::sqrt(uloc_norm_sq(horizon, quadrature_dt));
    }

    /// int_t^{t+1} ||f(s) - candidate||^2_{V'} ds by composite Simpson.
    double convergence_defect(const SpectralField& candidate, double t,
                              double quadrature_dt = 1e-3) const;

private:
    Kind kind_;
    LatticePtr lattice_;
    // Precomputed dual-norm expansion coefficients (meaning varies per kind).
    double dual_a_ = 0.0, dual_b_ = 0.0, dual_c_ = 0.0;
};

} // namespace specbox
