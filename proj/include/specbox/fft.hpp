#pragma once

#include "specbox/grid.hpp"

#include <complex>
#include <vector>

namespace specbox {

/// Iterative radix-2 complex DFT for power-of-two lengths, with precomputed
/// bit-reversal and twiddle tables. Unnormalized in both directions.
class Dft {
public:
    explicit Dft(int n);

    int size() const { return n_; }

    /// X_k = sum_m x_m e^{-2 pi i k m / N}, in place on interleaved re/im.
    void forward(double* data) const { run(data, tw_fwd_); }
    /// x_m = sum_k X_k e^{+2 pi i k m / N}, in place, unnormalized.
    void inverse(double* data) const { run(data, tw_inv_); }

    /// Transforms `inner` interleaved signals at once: `data` holds n rows of
    /// `inner` complex values and the FFT runs across rows. Keeps strided-axis
    /// transforms contiguous in memory.
    void forward_batch(double* data, std::size_t inner) const { run_batch(data, inner, tw_fwd_); }
    void inverse_batch(double* data, std::size_t inner) const { run_batch(data, inner, tw_inv_); }

private:
    void run(double* data, const std::vector<double>& tw) const;
    void run_batch(double* data, std::size_t inner, const std::vector<double>& tw) const;

    int n_ = 0;
    int log2n_ = 0;
    std::vector<int> bitrev_;
    std::vector<double> tw_fwd_;  // stage-major interleaved twiddles
    std::vector<double> tw_inv_;
};

/// d-dimensional complex transform on the row-major lattice of a GridSpec.
/// forward() applies the 1/N^d factor so coefficients follow the convention
/// u_hat(k) = |Omega|^-1 integral of u e^{-i kappa . x}.
class SpectralTransform {
public:
    explicit SpectralTransform(const GridSpec& spec);

    /// Physical samples -> coefficients (scaled by 1/N^d).
    void forward(std::complex<double>* data) const;
    /// Coefficients -> physical samples (unscaled sum).
    void inverse(std::complex<double>* data) const;

    const GridSpec& spec() const { return spec_; }

private:
    void transform_axis(std::complex<double>* data, int axis, bool fwd) const;

    GridSpec spec_;
    Dft plan_;
    std::size_t points_ = 0;
    mutable std::vector<double> scratch_;
};

} // namespace specbox
