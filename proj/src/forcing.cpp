#include "specbox/forcing.hpp"

#include "specbox/presets.hpp"

#include <cmath>

namespace specbox {

namespace {

double dual_cross(const SpectralField& a, const SpectralField& b) {
    const auto& lat = *a.lattice();
    double s = 0.0;
    for (const auto& m : lat.retained())
        for (int c = 0; c < a.dim(); ++c)
            s += (a.at(c, m.index).real() * b.at(c, m.index).real() +
                  a.at(c, m.index).imag() * b.at(c, m.index).imag()) /
                 m.kappa_sq;
    return s * lat.volume();
}

bool burst_on(double t, double width, double period) {
    double r = std::fmod(t, period);
    if (r < 0) r += period;
    return r < width;
}

void check_field(const SpectralField& f, const std::string& path,
                 std::vector<ConfigViolation>& out) {
    for (const auto& c : f.raw())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            out.push_back({path, "non-finite coefficient"});
            return;
        }
    if (!f.zero_mean()) out.push_back({path, "nonzero mean mode"});
    if (f.divergence_rel() > 1e-13) out.push_back({path, "not divergence-free"});
    if (f.conjugate_defect() > 1e-13) out.push_back({path, "not conjugate-symmetric"});
}

} // namespace

ForcingSpec::ForcingSpec(Kind kind) : kind_(std::move(kind)) {
    std::visit(
        [this](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SteadyForcing>) {
                lattice_ = k.base.lattice();
                dual_a_ = norms(k.base).dual_sq;
            } else if constexpr (std::is_same_v<T, ConvergentToSteadyForcing>) {
                lattice_ = k.limit.lattice();
                dual_a_ = norms(k.limit).dual_sq;
                dual_b_ = dual_cross(k.limit, k.transient);
                dual_c_ = norms(k.transient).dual_sq;
            } else if constexpr (std::is_same_v<T, TimePeriodicForcing>) {
                lattice_ = k.base.lattice();
                dual_a_ = norms(k.base).dual_sq;
                dual_b_ = dual_cross(k.base, k.modulation);
                dual_c_ = norms(k.modulation).dual_sq;
            } else if constexpr (std::is_same_v<T, BurstsForcing>) {
                lattice_ = k.pulse.lattice();
                dual_a_ = norms(k.pulse).dual_sq;
            } else if constexpr (std::is_same_v<T, RandomPhasesForcing>) {
                lattice_ = k.lattice;
                double s = 0.0;
                const double k0 = lattice_->kappa0();
                for (const auto& m : k.modes) {
                    double nsq = 0.0;
                    for (int c = 0; c < lattice_->dim(); ++c)
                        nsq += static_cast<double>(m.wavevector[c]) * m.wavevector[c];
                    // amplitude scales a unit-H-norm mode; V' divides by kappa.
                    s += m.amplitude * m.amplitude / (k0 * k0 * nsq);
                }
                dual_a_ = s;
            }
        },
        kind_);
}

std::vector<ConfigViolation> ForcingSpec::validate(const std::string& p) const {
    std::vector<ConfigViolation> out;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SteadyForcing>) {
                check_field(k.base, p + ".base", out);
            } else if constexpr (std::is_same_v<T, ConvergentToSteadyForcing>) {
                check_field(k.limit, p + ".limit", out);
                check_field(k.transient, p + ".transient", out);
                if (!(k.rate > 0.0)) out.push_back({p + ".rate", "must be positive"});
            } else if constexpr (std::is_same_v<T, TimePeriodicForcing>) {
                check_field(k.base, p + ".base", out);
                check_field(k.modulation, p + ".modulation", out);
                if (!(k.angular_frequency > 0.0))
                    out.push_back({p + ".angular_frequency", "must be positive"});
            } else if constexpr (std::is_same_v<T, BurstsForcing>) {
                check_field(k.pulse, p + ".pulse", out);
                if (!(k.pulse_width > 0.0) || k.pulse_width > 1.0)
                    out.push_back({p + ".pulse_width", "must lie in (0, 1]"});
                if (!(k.period >= 1.0)) out.push_back({p + ".period", "must be >= 1"});
            } else if constexpr (std::is_same_v<T, RandomPhasesForcing>) {
                if (!(k.correlation_time > 0.0))
                    out.push_back({p + ".correlation_time", "must be positive"});
                if (k.modes.empty()) out.push_back({p + ".modes", "must be nonempty"});
                for (std::size_t i = 0; i < k.modes.size(); ++i)
                    if (!k.lattice->is_retained(k.modes[i].wavevector))
                        out.push_back({p + ".modes[" + std::to_string(i) + "]",
                                       "wavevector outside the retained lattice"});
            }
        },
        kind_);
    return out;
}

void ForcingSpec::evaluate_into(double t, SpectralField& out) const {
    if (t < 0.0) throw std::domain_error("forcing evaluate: t must be nonnegative");
    if (!out.lattice() || out.lattice()->spec() != lattice_->spec())
        out = SpectralField(lattice_);
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SteadyForcing>) {
                out.raw() = k.base.raw();
            } else if constexpr (std::is_same_v<T, ConvergentToSteadyForcing>) {
                out.raw() = k.limit.raw();
                out.axpy(std::exp(-k.rate * t), k.transient);
            } else if constexpr (std::is_same_v<T, TimePeriodicForcing>) {
                out.raw() = k.base.raw();
                out.axpy(std::cos(k.angular_frequency * t), k.modulation);
            } else if constexpr (std::is_same_v<T, BurstsForcing>) {
                if (burst_on(t, k.pulse_width, k.period))
                    out.raw() = k.pulse.raw();
                else
                    out.set_zero();
            } else if constexpr (std::is_same_v<T, RandomPhasesForcing>) {
                out.set_zero();
                const double tau = k.correlation_time;
                const double knot_pos = t / tau;
                const std::uint64_t j = static_cast<std::uint64_t>(std::floor(knot_pos));
                const double frac = knot_pos - std::floor(knot_pos);
                for (std::size_t mi = 0; mi < k.modes.size(); ++mi) {
                    const auto& m = k.modes[mi];
                    const std::uint64_t key = (static_cast<std::uint64_t>(mi) + 1) << 40;
                    const double th0 = kTwoPi * uniform01(k.seed, key + j);
                    const double th1 = kTwoPi * uniform01(k.seed, key + j + 1);
                    const double th = th0 + frac * (th1 - th0);
                    const auto mode = unit_mode(k.lattice, m.wavevector);
                    const std::size_t ip = k.lattice->index_of(m.wavevector);
                    std::array<int, 3> neg = {-m.wavevector[0], -m.wavevector[1],
                                              -m.wavevector[2]};
                    const std::size_t im = k.lattice->index_of(neg);
                    const std::complex<double> rot{std::cos(th), std::sin(th)};
                    for (int c = 0; c < out.dim(); ++c) {
                        const auto a = m.amplitude * mode.at(c, ip) * rot;
                        out.at(c, ip) += a;
                        out.at(c, im) += std::conj(a);
                    }
                }
            }
        },
        kind_);
}

SpectralField ForcingSpec::evaluate(double t) const {
    SpectralField out(lattice_);
    evaluate_into(t, out);
    return out;
}

double ForcingSpec::dual_norm_sq_at(double t) const {
    if (t < 0.0) throw std::domain_error("forcing dual norm: t must be nonnegative");
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SteadyForcing>) {
                return dual_a_;
            } else if constexpr (std::is_same_v<T, ConvergentToSteadyForcing>) {
                const double e = std::exp(-k.rate * t);
                return dual_a_ + 2.0 * e * dual_b_ + e * e * dual_c_;
            } else if constexpr (std::is_same_v<T, TimePeriodicForcing>) {
                const double c = std::cos(k.angular_frequency * t);
                return dual_a_ + 2.0 * c * dual_b_ + c * c * dual_c_;
            } else if constexpr (std::is_same_v<T, BurstsForcing>) {
                return burst_on(t, k.pulse_width, k.period) ? dual_a_ : 0.0;
            } else {
                return dual_a_;  // phase rotations keep the dual norm constant
            }
        },
        kind_);
}

double ForcingSpec::uloc_norm_sq(double horizon, double quadrature_dt) const {
    if (horizon < 1.0) throw std::domain_error("uloc_norm: horizon must be >= 1");
    if (!(quadrature_dt > 0.0) || quadrature_dt > 1e-2)
        throw std::domain_error("uloc_norm: quadrature_dt must lie in (0, 1e-2]");
    const std::size_t win = static_cast<std::size_t>(std::llround(1.0 / quadrature_dt));
    const std::size_t total = static_cast<std::size_t>(std::ceil(horizon / quadrature_dt));

    // Prefix trapezoid sums of the dual norm squared.
    std::vector<double> prefix(total + 1, 0.0);
    double prev = dual_norm_sq_at(0.0);
    for (std::size_t i = 1; i <= total; ++i) {
        const double cur = dual_norm_sq_at(static_cast<double>(i) * quadrature_dt);
        prefix[i] = prefix[i - 1] + 0.5 * quadrature_dt * (prev + cur);
        prev = cur;
    }
    double best = 0.0;
    for (std::size_t i = 0; i + win <= total; ++i)
        best = std::max(best, prefix[i + win] - prefix[i]);
    return best;
}

double ForcingSpec::convergence_defect(const SpectralField& candidate, double t,
                                       double quadrature_dt) const {
    if (t < 0.0) throw std::domain_error("convergence_defect: t must be nonnegative");
    std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / quadrature_dt));
    if (steps % 2) ++steps;
    const double h = 1.0 / static_cast<double>(steps);

    SpectralField diff;
    auto integrand = [&](double s) {
        evaluate_into(s, diff);
        diff.axpy(-1.0, candidate);
        return norms(diff).dual_sq;
    };
    // Composite Simpson over [t, t+1].
    double acc = integrand(t) + integrand(t + 1.0);
    for (std::size_t i = 1; i < steps; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * integrand(t + static_cast<double>(i) * h);
    return acc * h / 3.0;
}

} // namespace specbox
