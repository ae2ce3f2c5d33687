#include "specbox/averaging.hpp"

#include <cmath>

namespace specbox {

namespace {

void tensor_product_accumulate(SymTensorField& acc, double w, const PhysicalField& v) {
    const int d = acc.dim();
    const std::size_t np = acc.points();
    for (int i = 0, c = 0; i < d; ++i)
        for (int j = i; j < d; ++j, ++c) {
            const double* a = v.component(i);
            const double* b = v.component(j);
            double* t = acc.component(c).data();
            for (std::size_t x = 0; x < np; ++x) t[x] += w * a[x] * b[x];
        }
}

} // namespace

TimeAverager::TimeAverager(LatticePtr lattice)
    : lattice_(std::move(lattice)),
      acc_v_(lattice_), acc_f_(lattice_), acc_nl_(lattice_), acc_vv_(lattice_),
      prev_v_(lattice_), prev_f_(lattice_), prev_nl_(lattice_), prev_v_phys_(lattice_),
      first_v_(lattice_), last_v_(lattice_),
      wf_mean_vphys_(lattice_), wf_mean_v_(lattice_), wf_mean_f_(lattice_),
      wf_s_vv_(lattice_) {}

void TimeAverager::accumulate(const Sample& s) {
    accumulate(s.scalars.t, s.state.v, s.f_hat, s.nl_hat, s.v_phys, s.scalars.grad_sq,
               s.scalars.work_rate, s.scalars.f_dual_sq);
}

void TimeAverager::welford_update(double w, const PhysicalField& v_phys, const SpectralField& v,
                                  const SpectralField& f) {
    wsum_ += w;
    const double ratio = w / wsum_;
    const int d = lattice_->dim();
    const std::size_t np = lattice_->points();

    // Physical-space velocity: means and the central second-moment tensor.
    {
        double d1[3], d2[3];
        for (std::size_t x = 0; x < np; ++x) {
            for (int c = 0; c < d; ++c) {
                double& m = wf_mean_vphys_.component(c)[x];
                const double val = v_phys.component(c)[x];
                d1[c] = val - m;
                m += ratio * d1[c];
                d2[c] = val - m;
            }
            for (int i = 0, c = 0; i < d; ++i)
                for (int j = i; j < d; ++j, ++c)
                    wf_s_vv_.component(c)[x] += w * d1[i] * d2[j];
        }
    }
    // Spectral velocity mean and the V-norm central moment; the covariance
    // update pairs the old force delta with the new velocity delta.
    double s_grad = 0.0, s_flux = 0.0;
    for (const auto& m : lattice_->retained()) {
        for (int c = 0; c < d; ++c) {
            const auto vf = v.at(c, m.index);
            const auto ff = f.at(c, m.index);
            auto& mv = wf_mean_v_.at(c, m.index);
            auto& mf = wf_mean_f_.at(c, m.index);
            const auto d1v = vf - mv;
            const auto d1f = ff - mf;
            mv += ratio * d1v;
            mf += ratio * d1f;
            const auto d2v = vf - mv;
            s_grad += m.kappa_sq * (d1v.real() * d2v.real() + d1v.imag() * d2v.imag());
            s_flux += d1f.real() * d2v.real() + d1f.imag() * d2v.imag();
        }
    }
    wf_s_grad_ += w * s_grad * lattice_->volume();
    wf_s_flux_ += w * s_flux * lattice_->volume();
}

void TimeAverager::accumulate(double t, const SpectralField& v, const SpectralField& f,
                              const SpectralField& nl, const PhysicalField& v_phys,
                              double grad_sq, double work_rate, double f_dual_sq) {
    if (count_ > 0) {
        if (t <= t_last_)
            throw OrderingError("TimeAverager: samples must arrive with increasing t");
        const double dt = t - t_last_;
        if (count_ == 1) {
            h_ = dt;
        } else if (std::abs(dt - h_) > 1e-9 * h_) {
            throw OrderingError("TimeAverager: samples must be uniformly spaced");
        }
        const double hw = 0.5 * dt;
        acc_v_.axpy(hw, prev_v_);
        acc_v_.axpy(hw, v);
        acc_f_.axpy(hw, prev_f_);
        acc_f_.axpy(hw, f);
        acc_nl_.axpy(hw, prev_nl_);
        acc_nl_.axpy(hw, nl);
        tensor_product_accumulate(acc_vv_, hw, prev_v_phys_);
        tensor_product_accumulate(acc_vv_, hw, v_phys);
        acc_grad_sq_ += hw * (prev_grad_sq_ + grad_sq);
        acc_work_ += hw * (prev_work_ + work_rate);
        acc_f_dual_sq_ += hw * (prev_f_dual_sq_ + f_dual_sq);

        welford_update(hw, prev_v_phys_, prev_v_, prev_f_);
        welford_update(hw, v_phys, v, f);
    } else {
        t_first_ = t;
        first_v_ = v;
    }
    prev_v_ = v;
    prev_f_ = f;
    prev_nl_ = nl;
    prev_v_phys_ = v_phys;
    prev_grad_sq_ = grad_sq;
    prev_work_ = work_rate;
    prev_f_dual_sq_ = f_dual_sq;
    last_v_ = v;
    t_last_ = t;
    ++count_;
}

SpectralField TimeAverager::mean_v() const {
    if (t_accum() <= 0.0) throw EmptyAverageError("TimeAverager: no elapsed averaging time");
    SpectralField m = acc_v_;
    m.scale(1.0 / t_accum());
    return m;
}

SpectralField TimeAverager::mean_f() const {
    if (t_accum() <= 0.0) throw EmptyAverageError("TimeAverager: no elapsed averaging time");
    SpectralField m = acc_f_;
    m.scale(1.0 / t_accum());
    return m;
}

ReynoldsAggregate TimeAverager::finalize(double nu) const {
    const double t = t_accum();
    if (t <= 0.0) throw EmptyAverageError("TimeAverager: no elapsed averaging time");
    ReynoldsAggregate a;
    a.t = t;
    a.nu = nu;
    a.v_bar = mean_v();
    a.f_bar = mean_f();
    a.B = acc_nl_;
    a.B.scale(1.0 / t);
    a.mt_grad_sq = acc_grad_sq_ / t;
    a.mt_work = acc_work_ / t;
    a.mt_f_dual_sq = acc_f_dual_sq_ / t;

    SpectralOps ops(lattice_);

    // R = M_t(v (x) v) - v_bar (x) v_bar at the grid points.
    a.R = acc_vv_;
    a.R.scale(1.0 / t);
    SymTensorField mt_vv = a.R;  // raw second moment, kept for scale factors
    PhysicalField vb_phys(lattice_);
    ops.to_physical(a.v_bar, vb_phys);
    const int d = lattice_->dim();
    const std::size_t np = lattice_->points();
    for (int i = 0, c = 0; i < d; ++i)
        for (int j = i; j < d; ++j, ++c) {
            const double* x = vb_phys.component(i);
            const double* y = vb_phys.component(j);
            double* r = a.R.component(c).data();
            for (std::size_t p = 0; p < np; ++p) r[p] -= x[p] * y[p];
        }

    a.k_field.assign(np, 0.0);
    for (int i = 0; i < d; ++i) {
        const auto diag = a.R.component(SymTensorField::comp_of(d, i, i));
        for (std::size_t p = 0; p < np; ++p) a.k_field[p] += 0.5 * diag[p];
    }

    // F = B - (v_bar . grad) v_bar.
    a.F = a.B;
    SpectralField nl_bar = ops.nonlinear_term(a.v_bar);
    a.F.axpy(-1.0, nl_bar);

    const auto nb = norms(a.v_bar);
    a.eps = nu * (a.mt_grad_sq - nb.grad_sq);
    a.flux_turb = a.mt_work - inner_h(a.f_bar, a.v_bar);

    a.v_start = first_v_;
    a.v_end = last_v_;
    a.v_start_sq = norms(first_v_).l2_sq;
    a.v_end_sq = norms(last_v_).l2_sq;

    // Cross-route identity checks against the Welford route.
    auto& ck = a.checks;
    {
        double diff = 0.0, scale = 0.0;
        for (int c = 0; c < a.R.comps(); ++c) {
            const auto rec = a.R.component(c);
            const auto wf = wf_s_vv_.component(c);
            const auto raw = mt_vv.component(c);
            for (std::size_t p = 0; p < np; ++p) {
                diff = std::max(diff, std::abs(rec[p] - wf[p] / t));
                scale = std::max(scale, std::abs(raw[p]));
            }
        }
        ck.reynolds_decomposition = scale > 0.0 ? diff / scale : 0.0;
    }
    {
        const double lhs = a.mt_grad_sq - nb.grad_sq;
        const double rhs = wf_s_grad_ / t;
        const double scale = std::max({std::abs(a.mt_grad_sq), nb.grad_sq, 1e-300});
        ck.orthogonality = std::abs(lhs - rhs) / scale;
        ck.orthogonality_raw = lhs;
    }
    {
        const double rhs = wf_s_flux_ / t;
        const double scale =
            std::max({std::abs(a.mt_work), std::abs(inner_h(a.f_bar, a.v_bar)), 1e-300});
        ck.flux_decomposition = std::abs(a.flux_turb - rhs) / scale;
    }
    {
        SpectralField div_r = ops.div_tensor(a.R);
        a.stress_work = inner_h(div_r, a.v_bar);
        SpectralField diff = a.F;
        diff.axpy(-1.0, div_r);
        // Relative to the inputs feeding both routes; F itself can cancel to
        // roundoff on near-steady runs.
        const double f_scale = std::max({std::sqrt(norms(a.F).l2_sq),
                                         std::sqrt(norms(a.B).l2_sq),
                                         std::sqrt(norms(nl_bar).l2_sq)});
        ck.f_equals_div_r = f_scale > 0.0 ? std::sqrt(norms(diff).l2_sq) / f_scale : 0.0;

        // (div R, v_bar) = -(R, grad v_bar) via physical quadrature.
        std::vector<std::vector<double>> grad;
        ops.gradient_physical(a.v_bar, grad);
        double pairing = 0.0;
        double r_frob_sq = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const auto& g = grad[static_cast<std::size_t>(d * i + j)];
                for (std::size_t p = 0; p < np; ++p) {
                    pairing += a.R.entry(i, j, p) * g[p];
                    r_frob_sq += a.R.entry(i, j, p) * a.R.entry(i, j, p);
                }
            }
        pairing *= lattice_->cell_volume();
        r_frob_sq *= lattice_->cell_volume();
        const double scale =
            std::max({std::abs(a.stress_work), std::abs(pairing),
                      std::sqrt(r_frob_sq * nb.grad_sq), 1e-300});
        ck.integration_by_parts = std::abs(a.stress_work + pairing) / scale;
    }
    {
        const auto eig = a.R.eigen_stats();
        ck.psd_min_eig = eig.min_eigenvalue;
        ck.psd_max_abs = eig.max_abs_entry;
    }
    return a;
}

MtBoundVerdicts TimeAverager::mt_operator_bound_check(double F, double nu) const {
    MtBoundVerdicts out;
    const double t = t_accum();
    out.applicable = t >= 1.0;
    if (!out.applicable) return out;

    const double v0_sq = norms(first_v_).l2_sq;
    const double budget = v0_sq / (nu * t) + 2.0 * F * F / (nu * nu);
    {
        const double val = std::sqrt(norms(mean_f()).dual_sq);
        const double bound = 2.0 * F;
        out.mean_force = {val <= bound, bound - val, bound, val};
    }
    {
        const double val = acc_grad_sq_ / t;
        out.mean_gradient = {val <= budget, budget - val, budget, val};
    }
    {
        const double val = acc_f_dual_sq_ / t;
        const double bound = 2.0 * F * F;
        out.mean_force_sq = {val <= bound, bound - val, bound, val};
    }
    {
        const double val = std::abs(acc_work_ / t);
        const double bound = std::sqrt(2.0) * F * std::sqrt(budget);
        out.mean_work = {val <= bound, bound - val, bound, val};
    }
    return out;
}

TimeAverager TimeAverager::merge(const TimeAverager& a, const TimeAverager& b) {
    if (a.count_ == 0) return b;
    if (b.count_ == 0) return a;
    if (std::abs(b.t_first_ - a.t_last_) > 1e-9 * std::max(1.0, std::abs(a.t_last_)))
        throw OrderingError("TimeAverager::merge: ranges must share the junction sample");
    if (a.count_ >= 2 && b.count_ >= 2 && std::abs(a.h_ - b.h_) > 1e-9 * a.h_)
        throw OrderingError("TimeAverager::merge: sample spacings differ");

    TimeAverager out = a;
    out.count_ += b.count_ - 1;  // junction sample counted once
    out.t_last_ = b.t_last_;
    out.h_ = a.count_ >= 2 ? a.h_ : b.h_;
    out.acc_v_.axpy(1.0, b.acc_v_);
    out.acc_f_.axpy(1.0, b.acc_f_);
    out.acc_nl_.axpy(1.0, b.acc_nl_);
    out.acc_vv_.axpy(1.0, b.acc_vv_);
    out.acc_grad_sq_ += b.acc_grad_sq_;
    out.acc_work_ += b.acc_work_;
    out.acc_f_dual_sq_ += b.acc_f_dual_sq_;
    out.prev_v_ = b.prev_v_;
    out.prev_f_ = b.prev_f_;
    out.prev_nl_ = b.prev_nl_;
    out.prev_v_phys_ = b.prev_v_phys_;
    out.prev_grad_sq_ = b.prev_grad_sq_;
    out.prev_work_ = b.prev_work_;
    out.prev_f_dual_sq_ = b.prev_f_dual_sq_;
    out.last_v_ = b.last_v_;

    // Parallel Welford combination.
    if (b.wsum_ > 0.0) {
        if (out.wsum_ == 0.0) {
            out.wsum_ = b.wsum_;
            out.wf_mean_vphys_ = b.wf_mean_vphys_;
            out.wf_mean_v_ = b.wf_mean_v_;
            out.wf_mean_f_ = b.wf_mean_f_;
            out.wf_s_vv_ = b.wf_s_vv_;
            out.wf_s_grad_ = b.wf_s_grad_;
            out.wf_s_flux_ = b.wf_s_flux_;
        } else {
            const double wa = out.wsum_, wb = b.wsum_, w = wa + wb;
            const double corr = wa * wb / w;
            const auto& lat = *out.lattice_;
            const int d = lat.dim();
            const std::size_t np = lat.points();
            double delta[3];
            for (std::size_t x = 0; x < np; ++x) {
                for (int c = 0; c < d; ++c)
                    delta[c] = b.wf_mean_vphys_.component(c)[x] -
                               out.wf_mean_vphys_.component(c)[x];
                for (int i = 0, c = 0; i < d; ++i)
                    for (int j = i; j < d; ++j, ++c)
                        out.wf_s_vv_.component(c)[x] +=
                            b.wf_s_vv_.component(c)[x] + corr * delta[i] * delta[j];
                for (int c = 0; c < d; ++c)
                    out.wf_mean_vphys_.component(c)[x] += (wb / w) * delta[c];
            }
            double dg = 0.0, dfl = 0.0;
            for (const auto& m : lat.retained())
                for (int c = 0; c < d; ++c) {
                    const auto dv = b.wf_mean_v_.at(c, m.index) - out.wf_mean_v_.at(c, m.index);
                    const auto df = b.wf_mean_f_.at(c, m.index) - out.wf_mean_f_.at(c, m.index);
                    dg += m.kappa_sq * (dv.real() * dv.real() + dv.imag() * dv.imag());
                    dfl += df.real() * dv.real() + df.imag() * dv.imag();
                    out.wf_mean_v_.at(c, m.index) += (wb / w) * dv;
                    out.wf_mean_f_.at(c, m.index) += (wb / w) * df;
                }
            out.wf_s_grad_ += b.wf_s_grad_ + corr * dg * lat.volume();
            out.wf_s_flux_ += b.wf_s_flux_ + corr * dfl * lat.volume();
            out.wsum_ = w;
        }
    }
    return out;
}

std::vector<double> mean_convergence_increments(const std::vector<ReynoldsAggregate>& aggs) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < aggs.size(); ++i) {
        SpectralField diff = aggs[i + 1].v_bar;
        diff.axpy(-1.0, aggs[i].v_bar);
        out.push_back(std::sqrt(norms(diff).grad_sq));
    }
    return out;
}

} // namespace specbox
