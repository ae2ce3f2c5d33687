#include "specbox/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace specbox {

void SpectralField::add_mode(const std::array<int, 3>& n,
                             const std::vector<std::complex<double>>& amp) {
    if (static_cast<int>(amp.size()) != dim())
        throw ShapeError("add_mode: amplitude arity does not match dimension");
    if (!lattice_->is_retained(n))
        throw ShapeError("add_mode: wavevector outside the retained lattice");
    std::array<int, 3> neg = {-n[0], -n[1], -n[2]};
    const std::size_t ip = lattice_->index_of(n);
    const std::size_t im = lattice_->index_of(neg);
    for (int c = 0; c < dim(); ++c) {
        at(c, ip) += amp[static_cast<std::size_t>(c)];
        at(c, im) += std::conj(amp[static_cast<std::size_t>(c)]);
    }
}

double SpectralField::divergence_rel() const {
    double max_div = 0.0;
    double max_scale = 0.0;
    for (const auto& m : lattice_->retained()) {
        std::complex<double> div{};
        double mag = 0.0;
        for (int c = 0; c < dim(); ++c) {
            div += static_cast<double>(m.n[c]) * at(c, m.index);
            mag += std::norm(at(c, m.index));
        }
        const double nn = std::sqrt(static_cast<double>(
            m.n[0] * m.n[0] + m.n[1] * m.n[1] + m.n[2] * m.n[2]));
        max_div = std::max(max_div, std::abs(div));
        max_scale = std::max(max_scale, nn * std::sqrt(mag));
    }
    return max_scale > 0.0 ? max_div / max_scale : 0.0;
}

double SpectralField::conjugate_defect() const {
    double worst = 0.0;
    for (const auto& m : lattice_->retained())
        for (int c = 0; c < dim(); ++c)
            worst = std::max(worst, std::abs(at(c, m.conj_index) - std::conj(at(c, m.index))));
    return worst;
}

bool SpectralField::zero_mean() const {
    for (int c = 0; c < dim(); ++c)
        if (at(c, 0) != std::complex<double>{}) return false;
    return true;
}

SymTensorField::EigStats SymTensorField::eigen_stats() const {
    EigStats s{0.0, 0.0};
    const std::size_t np = points();
    double min_eig = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    if (dim() == 2) {
        const double* a = component(0).data();
        const double* b = component(1).data();
        const double* c = component(2).data();
        for (std::size_t i = 0; i < np; ++i) {
            const double tr = a[i] + c[i];
            const double det = a[i] * c[i] - b[i] * b[i];
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            min_eig = std::min(min_eig, tr / 2.0 - disc);
            max_abs = std::max({max_abs, std::abs(a[i]), std::abs(b[i]), std::abs(c[i])});
        }
    } else {
        for (std::size_t i = 0; i < np; ++i) {
            double m[3][3];
            for (int r = 0; r < 3; ++r)
                for (int cc = r; cc < 3; ++cc)
                    m[r][cc] = m[cc][r] = entry(r, cc, i);
            for (int r = 0; r < 3; ++r)
                for (int cc = 0; cc < 3; ++cc)
                    max_abs = std::max(max_abs, std::abs(m[r][cc]));
            // Smallest eigenvalue of a symmetric 3x3 via the trigonometric
            // closed form for the characteristic cubic.
            const double q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
            double p2 = 0.0;
            for (int r = 0; r < 3; ++r)
                for (int cc = 0; cc < 3; ++cc) {
                    const double e = m[r][cc] - (r == cc ? q : 0.0);
                    p2 += e * e;
                }
            const double p = std::sqrt(p2 / 6.0);
            if (p < 1e-300) {
                min_eig = std::min(min_eig, q);
                continue;
            }
            double bmat[3][3];
            for (int r = 0; r < 3; ++r)
                for (int cc = 0; cc < 3; ++cc)
                    bmat[r][cc] = (m[r][cc] - (r == cc ? q : 0.0)) / p;
            const double detb =
                bmat[0][0] * (bmat[1][1] * bmat[2][2] - bmat[1][2] * bmat[2][1]) -
                bmat[0][1] * (bmat[1][0] * bmat[2][2] - bmat[1][2] * bmat[2][0]) +
                bmat[0][2] * (bmat[1][0] * bmat[2][1] - bmat[1][1] * bmat[2][0]);
            const double r = std::clamp(detb / 2.0, -1.0, 1.0);
            const double phi = std::acos(r) / 3.0;
            // Eigenvalues are q + 2p cos(phi + 2k pi/3); the smallest uses k = 1.
            const double lam_min = q + 2.0 * p * std::cos(phi + kTwoPi / 3.0);
            min_eig = std::min(min_eig, lam_min);
        }
    }
    s.min_eigenvalue = std::isfinite(min_eig) ? min_eig : 0.0;
    s.max_abs_entry = max_abs;
    return s;
}

} // namespace specbox
