#include "specbox/grid.hpp"

namespace specbox {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

void GridSpec::validate() const {
    std::vector<ConfigViolation> v;
    if (dimension != 2 && dimension != 3)
        v.push_back({"domain.dimension", "must be 2 or 3"});
    if (!power_of_two(resolution) || resolution < 8)
        v.push_back({"domain.resolution", "must be a power of two >= 8"});
    if (!(period > 0.0))
        v.push_back({"domain.period", "must be positive"});
    if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
        v.push_back({"domain.dealias_fraction", "must lie in (0, 1]"});
    if (!v.empty()) throw ConfigError(std::move(v));
}

Lattice::Lattice(const GridSpec& spec) : spec_(spec) {
    spec_.validate();
    points_ = spec_.point_count();
    volume_ = spec_.volume();

    const int d = spec_.dimension;
    const int kmax = spec_.max_mode();
    const double k0 = kappa0();

    kappa_sq_masked_.assign(points_, 0.0);
    mask_.assign(points_, 0.0);
    retained_.reserve(points_);

    for (std::size_t idx = 0; idx < points_; ++idx) {
        const auto w = wavevector(idx);
        bool keep = true;
        long nsq = 0;
        for (int a = 0; a < d; ++a) {
            if (std::abs(w[a]) > kmax) keep = false;
            nsq += static_cast<long>(w[a]) * w[a];
        }
        if (!keep || nsq == 0) continue;
        std::array<int, 3> neg = {-w[0], -w[1], -w[2]};
        RetainedMode m;
        m.index = idx;
        m.conj_index = index_of(neg);
        m.n = w;
        m.kappa_sq = k0 * k0 * static_cast<double>(nsq);
        kappa_sq_masked_[idx] = m.kappa_sq;
        mask_[idx] = 1.0;
        retained_.push_back(m);
    }
}

std::array<int, 3> Lattice::wavevector(std::size_t index) const {
    const int n = spec_.resolution;
    std::array<int, 3> w = {0, 0, 0};
    // Row-major storage: the last axis varies fastest.
    for (int a = spec_.dimension - 1; a >= 0; --a) {
        int m = static_cast<int>(index % static_cast<std::size_t>(n));
        index /= static_cast<std::size_t>(n);
        w[a] = (m <= n / 2) ? m : m - n;
    }
    return w;
}

std::size_t Lattice::index_of(const std::array<int, 3>& w) const {
    const int n = spec_.resolution;
    std::size_t idx = 0;
    for (int a = 0; a < spec_.dimension; ++a) {
        int m = w[a] >= 0 ? w[a] : w[a] + n;
        idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(m);
    }
    return idx;
}

bool Lattice::is_retained(const std::array<int, 3>& w) const {
    const int kmax = spec_.max_mode();
    long nsq = 0;
    for (int a = 0; a < spec_.dimension; ++a) {
        if (std::abs(w[a]) > kmax) return false;
        nsq += static_cast<long>(w[a]) * w[a];
    }
    return nsq != 0;
}

LatticePtr make_lattice(const GridSpec& spec) {
    return std::make_shared<const Lattice>(spec);
}

} // namespace specbox
