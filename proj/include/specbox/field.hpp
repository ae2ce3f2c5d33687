#pragma once

#include "specbox/grid.hpp"

#include <complex>
#include <span>
#include <vector>

namespace specbox {

/// Divergence-free, zero-mean velocity-type field stored as truncated Fourier
/// coefficients over the full lattice (masked sites are exactly zero).
/// Component-major layout: component c occupies [c*points, (c+1)*points).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(LatticePtr lattice)
        : lattice_(std::move(lattice)),
          coeffs_(static_cast<std::size_t>(lattice_->dim()) * lattice_->points()) {}

    const LatticePtr& lattice() const { return lattice_; }
    const GridSpec& grid() const { return lattice_->spec(); }
    int dim() const { return lattice_->dim(); }
    std::size_t points() const { return lattice_->points(); }

    std::complex<double>& at(int comp, std::size_t idx) {
        return coeffs_[static_cast<std::size_t>(comp) * points() + idx];
    }
    const std::complex<double>& at(int comp, std::size_t idx) const {
        return coeffs_[static_cast<std::size_t>(comp) * points() + idx];
    }
    std::span<std::complex<double>> component(int comp) {
        return {coeffs_.data() + static_cast<std::size_t>(comp) * points(), points()};
    }
    std::span<const std::complex<double>> component(int comp) const {
        return {coeffs_.data() + static_cast<std::size_t>(comp) * points(), points()};
    }
    std::vector<std::complex<double>>& raw() { return coeffs_; }
    const std::vector<std::complex<double>>& raw() const { return coeffs_; }

    void set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), std::complex<double>{}); }

    void scale(double a) {
        for (auto& c : coeffs_) c *= a;
    }
    /// this += a * other
    void axpy(double a, const SpectralField& other) {
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * other.coeffs_[i];
    }

    /// Sets the amplitude at integer wavevector n and its conjugate at -n.
    /// `amp` has one complex entry per component.
    void add_mode(const std::array<int, 3>& n, const std::vector<std::complex<double>>& amp);

    /// max_k |k . v_hat(k)| / max_k |k| |v_hat(k)|; zero field gives 0.
    double divergence_rel() const;
    /// Largest asymmetry |v(-k) - conj(v(k))| over retained modes.
    double conjugate_defect() const;
    bool zero_mean() const;

    bool operator==(const SpectralField& o) const { return coeffs_ == o.coeffs_; }

private:
    LatticePtr lattice_;
    std::vector<std::complex<double>> coeffs_;
};

/// Symmetric d x d tensor per physical grid point. Symmetry is exact by
/// storage: only the upper triangle is kept, component-major.
/// 2D order: (11, 12, 22); 3D order: (11, 12, 13, 22, 23, 33).
class SymTensorField {
public:
    SymTensorField() = default;
    explicit SymTensorField(LatticePtr lattice)
        : lattice_(std::move(lattice)),
          data_(static_cast<std::size_t>(comp_count(lattice_->dim())) * lattice_->points()) {}

    static int comp_count(int dim) { return dim * (dim + 1) / 2; }
    /// Upper-triangle flat component of (i, j), i <= j.
    static int comp_of(int dim, int i, int j) {
        if (i > j) std::swap(i, j);
        return dim == 2 ? (i == 0 ? j : 2) : (i == 0 ? j : (i == 1 ? 2 + j : 5));
    }

    const LatticePtr& lattice() const { return lattice_; }
    int dim() const { return lattice_->dim(); }
    std::size_t points() const { return lattice_->points(); }
    int comps() const { return comp_count(dim()); }

    double& at(int comp, std::size_t idx) {
        return data_[static_cast<std::size_t>(comp) * points() + idx];
    }
    double at(int comp, std::size_t idx) const {
        return data_[static_cast<std::size_t>(comp) * points() + idx];
    }
    double entry(int i, int j, std::size_t idx) const {
        return at(comp_of(dim(), i, j), idx);
    }
    std::span<double> component(int comp) {
        return {data_.data() + static_cast<std::size_t>(comp) * points(), points()};
    }
    std::span<const double> component(int comp) const {
        return {data_.data() + static_cast<std::size_t>(comp) * points(), points()};
    }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }
    void scale(double a) {
        for (auto& x : data_) x *= a;
    }
    void axpy(double a, const SymTensorField& other) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
    }

    /// Smallest eigenvalue over all grid points and the largest |entry|.
    struct EigStats {
        double min_eigenvalue;
        double max_abs_entry;
    };
    EigStats eigen_stats() const;

private:
    LatticePtr lattice_;
    std::vector<double> data_;
};

/// Physical-space velocity samples, component-major like SpectralField.
struct PhysicalField {
    LatticePtr lattice;
    std::vector<double> data;

    PhysicalField() = default;
    explicit PhysicalField(LatticePtr l)
        : lattice(std::move(l)),
          data(static_cast<std::size_t>(lattice->dim()) * lattice->points(), 0.0) {}

    double* component(int c) { return data.data() + static_cast<std::size_t>(c) * lattice->points(); }
    const double* component(int c) const {
        return data.data() + static_cast<std::size_t>(c) * lattice->points();
    }
};

} // namespace specbox
