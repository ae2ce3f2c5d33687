#include "specbox/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace specbox {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int int_log2(int n) {
    int l = 0;
    while ((1 << l) < n) ++l;
    return l;
}

// Stage-major twiddle layout: for each stage with block length `len`,
// the len/2 factors w^j, j = 0..len/2-1, interleaved re/im.
std::vector<double> make_twiddles(int n, double sign) {
    std::vector<double> tw;
    tw.reserve(2 * static_cast<std::size_t>(n));
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        for (int j = 0; j < len / 2; ++j) {
            tw.push_back(std::cos(ang * j));
            tw.push_back(std::sin(ang * j));
        }
    }
    return tw;
}

} // namespace

Dft::Dft(int n) : n_(n), log2n_(int_log2(n)) {
    if (!power_of_two(n) || n < 2)
        throw std::invalid_argument("Dft: length must be a power of two >= 2");
    bitrev_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < log2n_; ++b)
            if (i & (1 << b)) r |= 1 << (log2n_ - 1 - b);
        bitrev_[static_cast<std::size_t>(i)] = r;
    }
    tw_fwd_ = make_twiddles(n, -1.0);
    tw_inv_ = make_twiddles(n, +1.0);
}

void Dft::run(double* data, const std::vector<double>& tw) const {
    const int n = n_;
    for (int i = 0; i < n; ++i) {
        const int j = bitrev_[static_cast<std::size_t>(i)];
        if (j > i) {
            std::swap(data[2 * i], data[2 * j]);
            std::swap(data[2 * i + 1], data[2 * j + 1]);
        }
    }
    std::size_t tw_off = 0;
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        for (int base = 0; base < n; base += len) {
            const double* w = tw.data() + tw_off;
            double* lo = data + 2 * base;
            double* hi = data + 2 * (base + half);
            for (int j = 0; j < half; ++j) {
                const double wr = w[2 * j];
                const double wi = w[2 * j + 1];
                const double xr = hi[2 * j];
                const double xi = hi[2 * j + 1];
                const double tr = xr * wr - xi * wi;
                const double ti = xr * wi + xi * wr;
                const double ur = lo[2 * j];
                const double ui = lo[2 * j + 1];
                lo[2 * j] = ur + tr;
                lo[2 * j + 1] = ui + ti;
                hi[2 * j] = ur - tr;
                hi[2 * j + 1] = ui - ti;
            }
        }
        tw_off += 2 * static_cast<std::size_t>(half);
    }
}

SpectralTransform::SpectralTransform(const GridSpec& spec)
    : spec_(spec), plan_(spec.resolution), points_(spec.point_count()) {
    scratch_.resize(2 * static_cast<std::size_t>(spec.resolution));
}

void Dft::run_batch(double* data, std::size_t inner, const std::vector<double>& tw) const {
    const int n = n_;
    const std::size_t rb = 2 * inner;  // doubles per row
    for (int i = 0; i < n; ++i) {
        const int j = bitrev_[static_cast<std::size_t>(i)];
        if (j > i) {
            double* a = data + rb * static_cast<std::size_t>(i);
            double* b = data + rb * static_cast<std::size_t>(j);
            for (std::size_t x = 0; x < rb; ++x) std::swap(a[x], b[x]);
        }
    }
    std::size_t tw_off = 0;
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        for (int base = 0; base < n; base += len) {
            for (int j = 0; j < half; ++j) {
                const double wr = tw[tw_off + 2 * static_cast<std::size_t>(j)];
                const double wi = tw[tw_off + 2 * static_cast<std::size_t>(j) + 1];
                double* lo = data + rb * static_cast<std::size_t>(base + j);
                double* hi = data + rb * static_cast<std::size_t>(base + half + j);
                for (std::size_t x = 0; x < inner; ++x) {
                    const double xr = hi[2 * x];
                    const double xi = hi[2 * x + 1];
                    const double tr = xr * wr - xi * wi;
                    const double ti = xr * wi + xi * wr;
                    const double ur = lo[2 * x];
                    const double ui = lo[2 * x + 1];
                    lo[2 * x] = ur + tr;
                    lo[2 * x + 1] = ui + ti;
                    hi[2 * x] = ur - tr;
                    hi[2 * x + 1] = ui - ti;
                }
            }
        }
        tw_off += 2 * static_cast<std::size_t>(half);
    }
}

void SpectralTransform::transform_axis(std::complex<double>* data, int axis, bool fwd) const {
    const int d = spec_.dimension;
    const int n = spec_.resolution;
    double* raw = reinterpret_cast<double*>(data);

    std::size_t stride = 1;
    for (int a = d - 1; a > axis; --a) stride *= static_cast<std::size_t>(n);

    if (stride == 1) {
        const std::size_t lines = points_ / static_cast<std::size_t>(n);
        for (std::size_t l = 0; l < lines; ++l) {
            double* line = raw + 2 * l * static_cast<std::size_t>(n);
            fwd ? plan_.forward(line) : plan_.inverse(line);
        }
        return;
    }

    // Strided axis: run the whole batch of interleaved lines per block, so
    // every inner loop walks contiguous memory.
    const std::size_t block = stride * static_cast<std::size_t>(n);
    for (std::size_t base = 0; base < points_; base += block) {
        double* ptr = raw + 2 * base;
        fwd ? plan_.forward_batch(ptr, stride) : plan_.inverse_batch(ptr, stride);
    }
}

void SpectralTransform::forward(std::complex<double>* data) const {
    for (int a = 0; a < spec_.dimension; ++a) transform_axis(data, a, true);
    const double scale = 1.0 / static_cast<double>(points_);
    double* raw = reinterpret_cast<double*>(data);
    for (std::size_t i = 0; i < 2 * points_; ++i) raw[i] *= scale;
}

void SpectralTransform::inverse(std::complex<double>* data) const {
    for (int a = 0; a < spec_.dimension; ++a) transform_axis(data, a, false);
}

} // namespace specbox
