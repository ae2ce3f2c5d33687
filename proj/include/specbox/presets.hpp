#pragma once

#include "specbox/field.hpp"
#include "specbox/spectral_ops.hpp"

#include <cstdint>

namespace specbox {

/// Counter-based generator used everywhere randomness is needed; reproducible
/// across platforms and thread counts.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97f4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Uniform double in [0, 1) from a counter and seed.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(splitmix64(seed * 0x9E3779B97f4A7C15ULL + counter) >> 11) *
           0x1.0p-53;
}

/// 2D Taylor-Green vortex (sin x cos y, -cos x sin y) scaled by `amplitude`,
/// laid on the integer modes (1, +-1). Exact NSE solution decaying at rate
/// 2 nu on the 2 pi torus.
inline SpectralField taylor_green(LatticePtr lattice, double amplitude = 1.0) {
    if (lattice->dim() != 2)
        throw ShapeError("taylor_green: preset is two-dimensional");
    SpectralField v(lattice);
    const std::complex<double> i4{0.0, 0.25 * amplitude};
    v.add_mode({1, 1, 0}, {-i4, i4});
    v.add_mode({1, -1, 0}, {-i4, -i4});
    return v;
}

/// Seeded divergence-free field with |coefficient| ~ amplitude/|n|^decay and
/// reproducible phases.
inline SpectralField random_div_free(LatticePtr lattice, std::uint64_t seed,
                                     double amplitude = 1.0, double decay = 2.0) {
    SpectralField v(lattice);
    const int d = lattice->dim();
    std::uint64_t counter = 0;
    for (const auto& m : lattice->retained()) {
        if (m.conj_index < m.index) continue;
        double nsq = 0.0;
        for (int c = 0; c < d; ++c) nsq += static_cast<double>(m.n[c]) * m.n[c];
        const double mag = amplitude * std::pow(nsq, -0.5 * decay);
        for (int c = 0; c < d; ++c) {
            const double phase = kTwoPi * uniform01(seed, counter++);
            const double re = mag * std::cos(phase);
            const double im = mag * std::sin(phase);
            v.at(c, m.index) = {re, im};
            v.at(c, m.conj_index) = {re, -im};
        }
        if (m.conj_index == m.index)
            for (int c = 0; c < d; ++c) v.at(c, m.index) = v.at(c, m.index).real();
    }
    leray_project(v);
    return v;
}

/// Unit-H-norm divergence-free single real mode at wavevector n: the field
/// sqrt(2/|Omega|) * dir * cos(kappa n . x) for a unit vector dir
/// perpendicular to n (deterministically chosen).
inline SpectralField unit_mode(LatticePtr lattice, const std::array<int, 3>& n) {
    const int d = lattice->dim();
    // Pick the unit direction orthogonal to n with the lowest axis index.
    std::array<double, 3> dir = {0.0, 0.0, 0.0};
    for (int c = 0; c < d; ++c) {
        std::array<int, 3> axis = {0, 0, 0};
        axis[c] = 1;
        long dot = 0;
        for (int a = 0; a < d; ++a) dot += static_cast<long>(axis[a]) * n[a];
        if (dot == 0) {
            dir[c] = 1.0;
            break;
        }
    }
    bool has_dir = dir[0] != 0.0 || dir[1] != 0.0 || dir[2] != 0.0;
    SpectralField v(lattice);
    const double amp = std::sqrt(0.5 / lattice->volume());
    std::vector<std::complex<double>> a(static_cast<std::size_t>(d));
    if (has_dir) {
        for (int c = 0; c < d; ++c) a[static_cast<std::size_t>(c)] = amp * dir[c];
    } else {
        // No axis is orthogonal to n: project an arbitrary axis and normalize.
        std::array<double, 3> e = {1.0, 0.0, 0.0};
        double nsq = 0.0, dot = 0.0;
        for (int c = 0; c < d; ++c) {
            nsq += static_cast<double>(n[c]) * n[c];
            dot += e[c] * n[c];
        }
        double norm2 = 0.0;
        std::array<double, 3> p{};
        for (int c = 0; c < d; ++c) {
            p[c] = e[c] - dot * n[c] / nsq;
            norm2 += p[c] * p[c];
        }
        for (int c = 0; c < d; ++c) a[static_cast<std::size_t>(c)] = amp * p[c] / std::sqrt(norm2);
    }
    v.add_mode(n, a);
    return v;
}

} // namespace specbox
