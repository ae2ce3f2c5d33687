#pragma once

#include "specbox/fft.hpp"
#include "specbox/field.hpp"

#include <complex>
#include <vector>

namespace specbox {

/// ||u||^2, ||grad u||^2 and the V' dual norm squared, all with the
/// |Omega|-weighted Parseval convention.
struct NormTriple {
    double l2_sq = 0.0;
    double grad_sq = 0.0;
    double dual_sq = 0.0;
};

NormTriple norms(const SpectralField& u);

/// L2 inner product (a, b) = |Omega| sum Re(a_hat conj(b_hat)); this is also
/// the V'/V duality pairing for the fields handled here.
double inner_h(const SpectralField& a, const SpectralField& b);
/// V inner product (grad a, grad b).
double inner_v(const SpectralField& a, const SpectralField& b);

/// ||u||^2 <= C_Omega ||grad u||^2 with a 1e-12 relative allowance.
bool poincare_check(const SpectralField& u);

/// Removes the wavevector-parallel part of every retained mode in place;
/// masked sites and the mean are zeroed.
void leray_project(SpectralField& f);
/// Projects raw per-mode amplitudes (layout of SpectralField::raw()).
SpectralField leray_project(const std::vector<std::complex<double>>& raw, LatticePtr lattice);

/// FFT workspace bound to one grid. Owns the transform plan and scratch
/// buffers so hot loops never allocate. Not thread-safe; use one per thread.
class SpectralOps {
public:
    explicit SpectralOps(LatticePtr lattice);

    const LatticePtr& lattice() const { return lattice_; }

    /// Dealiased, Leray-projected div(v (x) v) of a valid field.
    SpectralField nonlinear_term(const SpectralField& v);
    /// Same, writing into `out` and exposing the physical-space samples of v.
    void nonlinear_term_into(const SpectralField& v, SpectralField& out, PhysicalField* v_phys);

    /// Leray-projected divergence of a symmetric tensor given at grid points.
    SpectralField div_tensor(const SymTensorField& R);

    /// Physical samples of a coefficient field.
    void to_physical(const SpectralField& u, PhysicalField& out);

    /// Physical samples of every gradient component: out[d*i + j] holds
    /// d(u_i)/dx_j at the grid points.
    void gradient_physical(const SpectralField& u, std::vector<std::vector<double>>& out);

private:
    void inverse_pair(std::span<const std::complex<double>> a,
                      std::span<const std::complex<double>> b, double* ra, double* rb);
    void forward_pair_masked(const double* ra, const double* rb,
                             std::vector<std::complex<double>>& a,
                             std::vector<std::complex<double>>& b);

    LatticePtr lattice_;
    SpectralTransform transform_;
    std::vector<std::complex<double>> pack_;
    std::vector<std::vector<double>> real_buf_;
    std::vector<std::vector<std::complex<double>>> coef_buf_;
};

/// Convenience one-shot wrappers (allocate a workspace; fine for tests).
SpectralField nonlinear_term(const SpectralField& v);
SpectralField div_tensor(const SymTensorField& R);
PhysicalField to_physical(const SpectralField& u);

} // namespace specbox
