#pragma once

#include "specbox/errors.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace specbox {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Periodic torus [0,L)^d sampled on N points per axis, with a sharp
/// spectral cutoff |k_i| <= floor(dealias_fraction * N/2) on every axis.
struct GridSpec {
    int dimension = 2;             // 2 or 3
    int resolution = 32;           // N per axis, power of two >= 8
    double period = kTwoPi;        // L
    double dealias_fraction = 2.0 / 3.0;

    /// Poincare constant on the zero-mean torus: ||u||^2 <= C * ||grad u||^2.
    double poincare_constant() const {
        return (period / kTwoPi) * (period / kTwoPi);
    }

    /// |Omega| = L^d.
    double volume() const {
        double v = period;
        for (int i = 1; i < dimension; ++i) v *= period;
        return v;
    }

    /// Largest retained integer wavenumber per axis.
    int max_mode() const {
        int cut = static_cast<int>(std::floor(dealias_fraction * resolution / 2.0));
        return std::min(cut, resolution / 2 - 1);
    }

    std::size_t point_count() const {
        std::size_t n = 1;
        for (int i = 0; i < dimension; ++i) n *= static_cast<std::size_t>(resolution);
        return n;
    }

    bool operator==(const GridSpec&) const = default;

    void validate() const;
};

/// One retained lattice site: flat storage index, integer wavevector,
/// index of the conjugate site and the squared physical wavenumber.
struct RetainedMode {
    std::size_t index;
    std::size_t conj_index;
    std::array<int, 3> n;
    double kappa_sq;
};

/// Precomputed index tables for a GridSpec. Immutable; shared between all
/// fields living on the same grid.
class Lattice {
public:
    explicit Lattice(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dimension; }
    int n() const { return spec_.resolution; }
    std::size_t points() const { return points_; }
    double volume() const { return volume_; }
    double cell_volume() const { return volume_ / static_cast<double>(points_); }

    /// 2*pi/L, the physical wavenumber of integer mode 1.
    double kappa0() const { return kTwoPi / spec_.period; }

    const std::vector<RetainedMode>& retained() const { return retained_; }
    /// kappa^2 per flat index; zero on masked (dealiased) sites and at k = 0.
    const std::vector<double>& kappa_sq_masked() const { return kappa_sq_masked_; }
    /// 1 on retained sites, 0 elsewhere.
    const std::vector<double>& mask() const { return mask_; }

    /// Integer wavevector of a flat index.
    std::array<int, 3> wavevector(std::size_t index) const;
    /// Flat index of an integer wavevector (components in (-N/2, N/2)).
    std::size_t index_of(const std::array<int, 3>& n) const;
    bool is_retained(const std::array<int, 3>& n) const;

private:
    GridSpec spec_;
    std::size_t points_ = 0;
    double volume_ = 0.0;
    std::vector<RetainedMode> retained_;
    std::vector<double> kappa_sq_masked_;
    std::vector<double> mask_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

LatticePtr make_lattice(const GridSpec& spec);

} // namespace specbox
