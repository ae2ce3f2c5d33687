#include "specbox/solver.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace specbox {

namespace {

bool all_finite(const SpectralField& f) {
    for (const auto& c : f.raw())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

double max_speed(const SpectralField& v) {
    PhysicalField p = to_physical(v);
    const int d = v.dim();
    const std::size_t np = v.points();
    double worst = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            const double x = p.component(c)[i];
            s += x * x;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

// out = table .* a (per component)
void apply_factor(const std::vector<double>& table, const SpectralField& a, SpectralField& out) {
    const std::size_t np = a.points();
    for (int c = 0; c < a.dim(); ++c) {
        const auto src = a.component(c);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < np; ++i) dst[i] = table[i] * src[i];
    }
}

// out += s * (table .* a)
void axpy_factor(double s, const std::vector<double>& table, const SpectralField& a,
                 SpectralField& out) {
    const std::size_t np = a.points();
    for (int c = 0; c < a.dim(); ++c) {
        const auto src = a.component(c);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < np; ++i) dst[i] += s * table[i] * src[i];
    }
}

} // namespace

std::vector<ConfigViolation> SolverConfig::validate() const {
    std::vector<ConfigViolation> v;
    if (!(viscosity > 0.0)) v.push_back({"physics.viscosity", "must be positive"});
    if (!(dt > 0.0)) v.push_back({"time.dt", "must be positive"});
    if (!(t_end >= 0.0)) v.push_back({"time.t_end", "must be nonnegative"});
    if (sample_stride < 1) v.push_back({"time.sample_stride", "must be >= 1"});
    if (dt > 0.0 && t_end >= 0.0) {
        const double steps_real = t_end / dt;
        const double steps = static_cast<double>(std::llround(steps_real));
        if (std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps))
            v.push_back({"time.t_end", "must be an integer number of steps"});
        else if (static_cast<std::uint64_t>(steps) % sample_stride != 0)
            v.push_back({"time.sample_stride", "must divide the step count"});
    }
    if (!initial.lattice() || initial.lattice()->spec() != lattice->spec()) {
        v.push_back({"initial", "field grid does not match the domain"});
    } else {
        if (initial.divergence_rel() > 1e-13) v.push_back({"initial", "not divergence-free"});
        if (!initial.zero_mean()) v.push_back({"initial", "nonzero mean mode"});
        const double umax = std::max(1.0, max_speed(initial));
        const double cfl = 0.5 * (lattice->spec().period / lattice->spec().resolution) / umax;
        if (dt > cfl)
            v.push_back({"time.dt", "violates the CFL guard dt <= " + std::to_string(cfl)});
    }
    auto fv = forcing.validate();
    v.insert(v.end(), fv.begin(), fv.end());
    if (forcing.lattice() && forcing.lattice()->spec() != lattice->spec())
        v.push_back({"forcing", "field grid does not match the domain"});
    return v;
}

Stepper::Stepper(const SolverConfig& config)
    : config_(&config), ops_(config.lattice),
      f_cur_(config.lattice), f_mid_(config.lattice), f_end_(config.lattice),
      nl_cur_(config.lattice), stage_u_(config.lattice), stage_k_(config.lattice),
      acc_(config.lattice), v_next_(config.lattice), v_phys_(config.lattice) {
    state_.v = config.initial;
    leray_project(state_.v);

    const auto& lat = *config.lattice;
    const double nu = config.viscosity;
    const double h = config.dt;
    exp_full_.assign(lat.points(), 0.0);
    exp_half_.assign(lat.points(), 0.0);
    for (const auto& m : lat.retained()) {
        exp_full_[m.index] = std::exp(-nu * m.kappa_sq * h);
        exp_half_[m.index] = std::exp(-nu * m.kappa_sq * h * 0.5);
    }
}

void Stepper::eval_rhs(const SpectralField& u, const SpectralField& f, SpectralField& out,
                       PhysicalField* phys) {
    ops_.nonlinear_term_into(u, out, phys);
    out.scale(-1.0);
    out.axpy(1.0, f);
}

void Stepper::prepare_sample() {
    if (sample_fresh_) return;
    config_->forcing.evaluate_into(state_.t, f_cur_);
    ops_.nonlinear_term_into(state_.v, nl_cur_, &v_phys_);
    sample_fresh_ = true;
}

ScalarSample Stepper::scalars() const {
    ScalarSample s;
    const auto t = norms(state_.v);
    s.t = state_.t;
    s.energy = t.l2_sq;
    s.grad_sq = t.grad_sq;
    s.work_rate = inner_h(f_cur_, state_.v);
    s.f_dual_sq = config_->forcing.dual_norm_sq_at(state_.t);
    s.dissipation_integral = state_.integrals.dissipation;
    s.work_integral = state_.integrals.work;
    return s;
}

void Stepper::step() {
    const double h = config_->dt;
    const double t = state_.t;

    prepare_sample();  // f_cur_ = f(t), nl_cur_ = NL(v), v_phys_ fresh
    config_->forcing.evaluate_into(t + 0.5 * h, f_mid_);
    config_->forcing.evaluate_into(t + h, f_end_);

    // Stage quadrature for the running integrals (Simpson weights on the
    // RK4 stage states, matching the trajectory's order).
    double diss = norms(state_.v).grad_sq;
    double work = inner_h(f_cur_, state_.v);

    // k1 = -NL(v) + f(t); acc = E k1
    stage_k_.raw() = nl_cur_.raw();
    stage_k_.scale(-1.0);
    stage_k_.axpy(1.0, f_cur_);
    apply_factor(exp_full_, stage_k_, acc_);

    // u2 = Eh (v + h/2 k1)
    stage_u_.raw() = state_.v.raw();
    stage_u_.axpy(0.5 * h, stage_k_);
    apply_factor(exp_half_, stage_u_, stage_u_);
    diss += 2.0 * norms(stage_u_).grad_sq;
    work += 2.0 * inner_h(f_mid_, stage_u_);

    // k2 = -NL(u2) + f(t + h/2)
    eval_rhs(stage_u_, f_mid_, stage_k_, nullptr);
    axpy_factor(2.0, exp_half_, stage_k_, acc_);

    // u3 = Eh v + h/2 k2
    apply_factor(exp_half_, state_.v, stage_u_);
    stage_u_.axpy(0.5 * h, stage_k_);
    diss += 2.0 * norms(stage_u_).grad_sq;
    work += 2.0 * inner_h(f_mid_, stage_u_);

    // k3 = -NL(u3) + f(t + h/2)
    eval_rhs(stage_u_, f_mid_, stage_k_, nullptr);
    axpy_factor(2.0, exp_half_, stage_k_, acc_);

    // u4 = E v + h Eh k3
    apply_factor(exp_full_, state_.v, stage_u_);
    axpy_factor(h, exp_half_, stage_k_, stage_u_);
    diss += norms(stage_u_).grad_sq;
    work += inner_h(f_end_, stage_u_);

    // k4 = -NL(u4) + f(t + h)
    eval_rhs(stage_u_, f_end_, stage_k_, nullptr);
    acc_.axpy(1.0, stage_k_);

    // v+ = E v + h/6 acc
    apply_factor(exp_full_, state_.v, v_next_);
    v_next_.axpy(h / 6.0, acc_);

    if (!all_finite(v_next_)) throw BlowUpError(state_, t + h);

    std::swap(state_.v.raw(), v_next_.raw());
    state_.integrals.dissipation += h / 6.0 * diss;
    state_.integrals.work += h / 6.0 * work;
    state_.step += 1;
    state_.t = static_cast<double>(state_.step) * h;

    // f(t + h) becomes the next step's f(t); NL and physical caches go stale.
    std::swap(f_cur_.raw(), f_end_.raw());
    sample_fresh_ = false;
}

RunResult run(const SolverConfig& config, const std::vector<SampleObserver>& observers) {
    auto violations = config.validate();
    if (!violations.empty()) throw ConfigError(std::move(violations));

    Stepper stepper(config);
    RunResult result;
    result.series.dt = config.dt * static_cast<double>(config.sample_stride);
    const std::uint64_t steps = config.step_count();

    auto emit = [&]() {
        stepper.prepare_sample();
        const ScalarSample s = stepper.scalars();
        result.series.rows.push_back(s);
        if (!observers.empty()) {
            Sample view{s, stepper.state(), stepper.f_current(), stepper.nl_current(),
                        stepper.v_physical()};
            for (const auto& obs : observers) obs(view);
        }
    };

    try {
        emit();  // t = 0
        for (std::uint64_t k = 0; k < steps; ++k) {
            stepper.step();
            if ((k + 1) % config.sample_stride == 0) emit();
        }
    } catch (BlowUpError& e) {
        for (const auto& r : result.series.rows)
            e.diagnostic_series.push_back({r.t, r.energy, r.grad_sq, r.work_rate, r.f_dual_sq,
                                           r.dissipation_integral, r.work_integral});
        throw;
    }
    result.final_state = stepper.state();
    return result;
}

std::vector<double> energy_residual(const SampleSeries& series, double nu) {
    if (series.rows.size() < 2)
        throw std::domain_error("energy_residual: need at least two samples");
    std::vector<double> r;
    r.reserve(series.rows.size() - 1);
    for (std::size_t j = 0; j + 1 < series.rows.size(); ++j) {
        const auto& a = series.rows[j];
        const auto& b = series.rows[j + 1];
        r.push_back(0.5 * (b.energy - a.energy) +
                    nu * (b.dissipation_integral - a.dissipation_integral) -
                    (b.work_integral - a.work_integral));
    }
    return r;
}

AprioriVerdicts verify_apriori_bounds(const SampleSeries& series, double F, double nu,
                                      double c_omega, double v0_sq) {
    AprioriVerdicts out;
    const double f2nu = F * F / nu;

    {
        const double bound = v0_sq + (3.0 + c_omega / nu) * f2nu;
        double worst = 0.0;
        for (const auto& s : series.rows) worst = std::max(worst, s.energy);
        out.energy = {worst <= bound, bound - worst, bound, worst};
    }
    {
        double min_slack = std::numeric_limits<double>::infinity();
        double worst = 0.0, worst_bound = v0_sq + f2nu;
        for (const auto& s : series.rows) {
            const double bound = v0_sq + (std::floor(s.t) + 1.0) * f2nu;
            const double val = nu * s.dissipation_integral;
            if (bound - val < min_slack) {
                min_slack = bound - val;
                worst = val;
                worst_bound = bound;
            }
        }
        if (!std::isfinite(min_slack)) min_slack = worst_bound;
        out.dissipation = {min_slack >= 0.0, min_slack, worst_bound, worst};
    }
    {
        // For every sampled pair with 0 <= tau - xi <= 1:
        // E(tau) + nu D(tau) - E(xi) - nu D(xi) <= F^2/nu.
        const double h = series.dt;
        const std::size_t win =
            h > 0 ? static_cast<std::size_t>(std::floor(1.0 / h + 1e-9)) : 0;
        double worst = 0.0;
        std::deque<std::size_t> q;  // monotone indices of psi minima
        std::vector<double> psi(series.rows.size());
        for (std::size_t j = 0; j < series.rows.size(); ++j)
            psi[j] = series.rows[j].energy + nu * series.rows[j].dissipation_integral;
        for (std::size_t j = 0; j < series.rows.size(); ++j) {
            while (!q.empty() && q.front() + win < j) q.pop_front();
            if (!q.empty()) worst = std::max(worst, psi[j] - psi[q.front()]);
            while (!q.empty() && psi[q.back()] >= psi[j]) q.pop_back();
            q.push_back(j);
        }
        out.window = {worst <= f2nu, f2nu - worst, f2nu, worst};
    }
    return out;
}

} // namespace specbox
