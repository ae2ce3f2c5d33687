#include "specbox/spectral_ops.hpp"

#include <cmath>

namespace specbox {

NormTriple norms(const SpectralField& u) {
    NormTriple t;
    const auto& lat = *u.lattice();
    const double vol = lat.volume();
    const int d = u.dim();
    for (const auto& m : lat.retained()) {
        double mag = 0.0;
        for (int c = 0; c < d; ++c) mag += std::norm(u.at(c, m.index));
        t.l2_sq += mag;
        t.grad_sq += m.kappa_sq * mag;
        t.dual_sq += mag / m.kappa_sq;
    }
    t.l2_sq *= vol;
    t.grad_sq *= vol;
    t.dual_sq *= vol;
    return t;
}

double inner_h(const SpectralField& a, const SpectralField& b) {
    const auto& lat = *a.lattice();
    if (b.lattice()->spec() != lat.spec())
        throw ShapeError("inner_h: fields live on different grids");
    double s = 0.0;
    for (const auto& m : lat.retained())
        for (int c = 0; c < a.dim(); ++c)
            s += a.at(c, m.index).real() * b.at(c, m.index).real() +
                 a.at(c, m.index).imag() * b.at(c, m.index).imag();
    return s * lat.volume();
}

double inner_v(const SpectralField& a, const SpectralField& b) {
    const auto& lat = *a.lattice();
    if (b.lattice()->spec() != lat.spec())
        throw ShapeError("inner_v: fields live on different grids");
    double s = 0.0;
    for (const auto& m : lat.retained()) {
        double dot = 0.0;
        for (int c = 0; c < a.dim(); ++c)
            dot += a.at(c, m.index).real() * b.at(c, m.index).real() +
                   a.at(c, m.index).imag() * b.at(c, m.index).imag();
        s += m.kappa_sq * dot;
    }
    return s * lat.volume();
}

bool poincare_check(const SpectralField& u) {
    const auto t = norms(u);
    const double c = u.grid().poincare_constant();
    return t.l2_sq <= c * t.grad_sq + 1e-12 * t.grad_sq;
}

void leray_project(SpectralField& f) {
    const auto& lat = *f.lattice();
    const int d = f.dim();
    const auto& mask = lat.mask();
    for (int c = 0; c < d; ++c) {
        auto comp = f.component(c);
        for (std::size_t i = 0; i < comp.size(); ++i)
            if (mask[i] == 0.0) comp[i] = {};
    }
    for (const auto& m : lat.retained()) {
        std::complex<double> dot{};
        double nsq = 0.0;
        for (int c = 0; c < d; ++c) {
            dot += static_cast<double>(m.n[c]) * f.at(c, m.index);
            nsq += static_cast<double>(m.n[c]) * m.n[c];
        }
        dot /= nsq;
        for (int c = 0; c < d; ++c) f.at(c, m.index) -= static_cast<double>(m.n[c]) * dot;
    }
}

SpectralField leray_project(const std::vector<std::complex<double>>& raw, LatticePtr lattice) {
    SpectralField f(std::move(lattice));
    if (raw.size() != f.raw().size())
        throw ShapeError("leray_project: raw amplitude count does not match grid");
    f.raw() = raw;
    leray_project(f);
    return f;
}

SpectralOps::SpectralOps(LatticePtr lattice)
    : lattice_(std::move(lattice)), transform_(lattice_->spec()) {
    const std::size_t np = lattice_->points();
    pack_.resize(np);
    const int d = lattice_->dim();
    real_buf_.assign(static_cast<std::size_t>(d + SymTensorField::comp_count(d)),
                     std::vector<double>(np, 0.0));
    coef_buf_.assign(static_cast<std::size_t>(SymTensorField::comp_count(d)),
                     std::vector<std::complex<double>>(np));
}

void SpectralOps::inverse_pair(std::span<const std::complex<double>> a,
                               std::span<const std::complex<double>> b, double* ra, double* rb) {
    const std::size_t np = lattice_->points();
    if (b.empty()) {
        for (std::size_t i = 0; i < np; ++i) pack_[i] = a[i];
    } else {
        for (std::size_t i = 0; i < np; ++i)
            pack_[i] = {a[i].real() - b[i].imag(), a[i].imag() + b[i].real()};
    }
    transform_.inverse(pack_.data());
    if (rb == nullptr) {
        for (std::size_t i = 0; i < np; ++i) ra[i] = pack_[i].real();
    } else {
        for (std::size_t i = 0; i < np; ++i) {
            ra[i] = pack_[i].real();
            rb[i] = pack_[i].imag();
        }
    }
}

void SpectralOps::forward_pair_masked(const double* ra, const double* rb,
                                      std::vector<std::complex<double>>& a,
                                      std::vector<std::complex<double>>& b) {
    const std::size_t np = lattice_->points();
    if (rb == nullptr) {
        for (std::size_t i = 0; i < np; ++i) pack_[i] = {ra[i], 0.0};
    } else {
        for (std::size_t i = 0; i < np; ++i) pack_[i] = {ra[i], rb[i]};
    }
    transform_.forward(pack_.data());
    std::fill(a.begin(), a.end(), std::complex<double>{});
    if (rb != nullptr) std::fill(b.begin(), b.end(), std::complex<double>{});
    // Hermitian split; exact symmetry by construction.
    for (const auto& m : lattice_->retained()) {
        const auto p = pack_[m.index];
        const auto q = pack_[m.conj_index];
        a[m.index] = {0.5 * (p.real() + q.real()), 0.5 * (p.imag() - q.imag())};
        if (rb != nullptr)
            b[m.index] = {0.5 * (p.imag() + q.imag()), 0.5 * (q.real() - p.real())};
    }
}

void SpectralOps::to_physical(const SpectralField& u, PhysicalField& out) {
    if (!out.lattice || out.lattice->spec() != lattice_->spec()) out = PhysicalField(lattice_);
    inverse_pair(u.component(0), u.component(1), out.component(0), out.component(1));
    if (u.dim() == 3) inverse_pair(u.component(2), {}, out.component(2), nullptr);
}

void SpectralOps::nonlinear_term_into(const SpectralField& v, SpectralField& out,
                                      PhysicalField* v_phys) {
    const int d = lattice_->dim();
    const std::size_t np = lattice_->points();
    const double k0 = lattice_->kappa0();

    PhysicalField local;
    PhysicalField& ph = v_phys ? *v_phys : local;
    to_physical(v, ph);

    // Pointwise products v_i v_j into the tensor scratch slots.
    const int nc = SymTensorField::comp_count(d);
    for (int i = 0, c = 0; i < d; ++i)
        for (int j = i; j < d; ++j, ++c) {
            const double* a = ph.component(i);
            const double* b = ph.component(j);
            double* t = real_buf_[static_cast<std::size_t>(c)].data();
            for (std::size_t x = 0; x < np; ++x) t[x] = a[x] * b[x];
        }

    // Transform products back, two real fields per complex FFT.
    for (int c = 0; c < nc; c += 2) {
        const double* ra = real_buf_[static_cast<std::size_t>(c)].data();
        const double* rb = c + 1 < nc ? real_buf_[static_cast<std::size_t>(c + 1)].data() : nullptr;
        forward_pair_masked(ra, rb, coef_buf_[static_cast<std::size_t>(c)],
                            rb ? coef_buf_[static_cast<std::size_t>(c + 1)]
                               : coef_buf_[static_cast<std::size_t>(c)]);
    }

    if (!out.lattice() || out.lattice()->spec() != lattice_->spec()) out = SpectralField(lattice_);
    out.set_zero();
    for (const auto& m : lattice_->retained()) {
        std::complex<double> div[3];
        double nsq = 0.0;
        for (int i = 0; i < d; ++i) {
            std::complex<double> s{};
            for (int j = 0; j < d; ++j)
                s += (k0 * m.n[j]) * coef_buf_[static_cast<std::size_t>(
                                         SymTensorField::comp_of(d, i, j))][m.index];
            div[i] = {-s.imag(), s.real()};  // multiply by i
            nsq += static_cast<double>(m.n[i]) * m.n[i];
        }
        std::complex<double> dot{};
        for (int i = 0; i < d; ++i) dot += static_cast<double>(m.n[i]) * div[i];
        dot /= nsq;
        for (int i = 0; i < d; ++i)
            out.at(i, m.index) = div[i] - static_cast<double>(m.n[i]) * dot;
    }
}

SpectralField SpectralOps::nonlinear_term(const SpectralField& v) {
    SpectralField out(lattice_);
    nonlinear_term_into(v, out, nullptr);
    return out;
}

SpectralField SpectralOps::div_tensor(const SymTensorField& R) {
    const int d = lattice_->dim();
    if (R.lattice()->spec() != lattice_->spec())
        throw ShapeError("div_tensor: tensor grid does not match workspace");
    const int nc = R.comps();
    const double k0 = lattice_->kappa0();

    for (int c = 0; c < nc; c += 2) {
        const double* ra = R.component(c).data();
        const double* rb = c + 1 < nc ? R.component(c + 1).data() : nullptr;
        forward_pair_masked(ra, rb, coef_buf_[static_cast<std::size_t>(c)],
                            rb ? coef_buf_[static_cast<std::size_t>(c + 1)]
                               : coef_buf_[static_cast<std::size_t>(c)]);
    }

    SpectralField out(lattice_);
    for (const auto& m : lattice_->retained()) {
        std::complex<double> div[3];
        double nsq = 0.0;
        for (int i = 0; i < d; ++i) {
            std::complex<double> s{};
            for (int j = 0; j < d; ++j)
                s += (k0 * m.n[j]) * coef_buf_[static_cast<std::size_t>(
                                         SymTensorField::comp_of(d, i, j))][m.index];
            div[i] = {-s.imag(), s.real()};
            nsq += static_cast<double>(m.n[i]) * m.n[i];
        }
        std::complex<double> dot{};
        for (int i = 0; i < d; ++i) dot += static_cast<double>(m.n[i]) * div[i];
        dot /= nsq;
        for (int i = 0; i < d; ++i)
            out.at(i, m.index) = div[i] - static_cast<double>(m.n[i]) * dot;
    }
    return out;
}

void SpectralOps::gradient_physical(const SpectralField& u, std::vector<std::vector<double>>& out) {
    const int d = lattice_->dim();
    const std::size_t np = lattice_->points();
    const double k0 = lattice_->kappa0();
    out.assign(static_cast<std::size_t>(d) * d, std::vector<double>(np, 0.0));

    std::vector<std::complex<double>> ga(np), gb(np);
    // Pack gradient components in pairs for the inverse transforms.
    std::vector<std::pair<int, int>> comps;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) comps.emplace_back(i, j);
    for (std::size_t c = 0; c < comps.size(); c += 2) {
        std::fill(ga.begin(), ga.end(), std::complex<double>{});
        std::fill(gb.begin(), gb.end(), std::complex<double>{});
        const bool has_b = c + 1 < comps.size();
        for (const auto& m : lattice_->retained()) {
            {
                const auto [i, j] = comps[c];
                const auto v = u.at(i, m.index);
                ga[m.index] = {-k0 * m.n[j] * v.imag(), k0 * m.n[j] * v.real()};
            }
            if (has_b) {
                const auto [i, j] = comps[c + 1];
                const auto v = u.at(i, m.index);
                gb[m.index] = {-k0 * m.n[j] * v.imag(), k0 * m.n[j] * v.real()};
            }
        }
        inverse_pair(ga, has_b ? std::span<const std::complex<double>>(gb)
                               : std::span<const std::complex<double>>{},
                     out[c].data(), has_b ? out[c + 1].data() : nullptr);
    }
}

SpectralField nonlinear_term(const SpectralField& v) {
    SpectralOps ops(v.lattice());
    return ops.nonlinear_term(v);
}

SpectralField div_tensor(const SymTensorField& R) {
    SpectralOps ops(R.lattice());
    return ops.div_tensor(R);
}

PhysicalField to_physical(const SpectralField& u) {
    SpectralOps ops(u.lattice());
    PhysicalField out(u.lattice());
    ops.to_physical(u, out);
    return out;
}

} // namespace specbox
