#pragma once

#include "specbox/field.hpp"
#include "specbox/fft.hpp"
#include "specbox/presets.hpp"
#include "specbox/spectral_ops.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace specbox::test {

/// Random divergence-free, zero-mean field with a decaying spectrum.
inline SpectralField random_field(LatticePtr lattice, std::uint64_t seed, double amplitude = 1.0,
                                  double decay = 2.0) {
    return random_div_free(std::move(lattice), seed, amplitude, decay);
}

/// ||u||^2 by physical-space quadrature: (|Omega|/N^d) * sum |u(x)|^2.
inline double l2_sq_physical(const SpectralField& u) {
    PhysicalField p = to_physical(u);
    double s = 0.0;
    for (double x : p.data) s += x * x;
    return s * u.lattice()->cell_volume();
}

/// (a, b) by physical-space quadrature.
inline double inner_h_physical(const SpectralField& a, const SpectralField& b) {
    PhysicalField pa = to_physical(a);
    PhysicalField pb = to_physical(b);
    double s = 0.0;
    for (std::size_t i = 0; i < pa.data.size(); ++i) s += pa.data[i] * pb.data[i];
    return s * a.lattice()->cell_volume();
}

/// Brute-force dealiased convolution oracle for P div(v (x) v): per retained
/// output mode, sums over every retained wavevector pair (a, b = n - a).
inline SpectralField nonlinear_term_bruteforce(const SpectralField& v) {
    const auto& lat = *v.lattice();
    const int d = v.dim();
    const double k0 = lat.kappa0();
    SpectralField out(v.lattice());

    // Gather v_hat over the full lattice; zero mean included for pairs a = n.
    for (const auto& mo : lat.retained()) {
        std::complex<double> tensor_div[3] = {};
        for (const auto& ma : lat.retained()) {
            std::array<int, 3> nb = {mo.n[0] - ma.n[0], mo.n[1] - ma.n[1], mo.n[2] - ma.n[2]};
            bool inside = true;
            long nbsq = 0;
            const int kmax = lat.spec().max_mode();
            for (int c = 0; c < d; ++c) {
                if (std::abs(nb[c]) > kmax) inside = false;
                nbsq += static_cast<long>(nb[c]) * nb[c];
            }
            if (!inside || nbsq == 0) continue;
            const std::size_t ib = lat.index_of(nb);
            for (int i = 0; i < d; ++i) {
                std::complex<double> s{};
                for (int j = 0; j < d; ++j)
                    s += (k0 * mo.n[j]) * v.at(i, ma.index) * v.at(j, ib);
                tensor_div[i] += std::complex<double>{-s.imag(), s.real()};
            }
        }
        double nsq = 0.0;
        std::complex<double> dot{};
        for (int i = 0; i < d; ++i) {
            nsq += static_cast<double>(mo.n[i]) * mo.n[i];
            dot += static_cast<double>(mo.n[i]) * tensor_div[i];
        }
        dot /= nsq;
        for (int i = 0; i < d; ++i)
            out.at(i, mo.index) = tensor_div[i] - static_cast<double>(mo.n[i]) * dot;
    }
    return out;
}

inline double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
    return worst;
}

inline double max_coeff_abs(const SpectralField& a) {
    double worst = 0.0;
    for (const auto& c : a.raw()) worst = std::max(worst, std::abs(c));
    return worst;
}

} // namespace specbox::test
