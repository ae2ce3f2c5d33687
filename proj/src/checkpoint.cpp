#include "specbox/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace specbox {

namespace {

constexpr int kVersion = 1;

std::string hexfloat(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

double parse_hexfloat(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

void put_le_double(std::string& out, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof u);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

double get_le_double(const char* p) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
    double x;
    std::memcpy(&x, &u, sizeof x);
    return x;
}

/// Retained modes sorted lexicographically by integer wavevector.
std::vector<const RetainedMode*> lexicographic_modes(const Lattice& lat) {
    std::vector<const RetainedMode*> order;
    order.reserve(lat.retained().size());
    for (const auto& m : lat.retained()) order.push_back(&m);
    std::sort(order.begin(), order.end(), [](const RetainedMode* a, const RetainedMode* b) {
        return a->n < b->n;
    });
    return order;
}

} // namespace

void write_checkpoint(const std::string& path, const SolverState& state, const GridSpec& grid,
                      const std::string& config_echo) {
    const auto& lat = *state.v.lattice();
    const auto order = lexicographic_modes(lat);
    const std::size_t count = order.size() * static_cast<std::size_t>(lat.dim()) * 2;

    std::string body;
    body.reserve(count * 8);
    for (const auto* m : order)
        for (int c = 0; c < lat.dim(); ++c) {
            put_le_double(body, state.v.at(c, m->index).real());
            put_le_double(body, state.v.at(c, m->index).imag());
        }

    std::ostringstream head;
    head << "specbox-checkpoint " << kVersion << "\n";
    head << "config " << config_echo << "\n";
    head << "t " << hexfloat(state.t) << " step " << state.step << "\n";
    head << "integrals " << hexfloat(state.integrals.dissipation) << " "
         << hexfloat(state.integrals.work) << "\n";
    head << "grid " << grid.dimension << " " << grid.resolution << " " << hexfloat(grid.period)
         << " " << hexfloat(grid.dealias_fraction) << "\n";
    head << "data " << count << "\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << head.str();
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

namespace {

CheckpointInfo read_header(std::ifstream& in, const std::string& path) {
    CheckpointInfo info;
    std::string line;

    auto fail = [&](const std::string& why) -> CheckpointInfo& {
        throw std::runtime_error("malformed checkpoint " + path + ": " + why);
    };

    if (!std::getline(in, line)) fail("missing magic");
    {
        std::istringstream ls(line);
        std::string magic;
        ls >> magic >> info.version;
        if (magic != "specbox-checkpoint") fail("bad magic");
        if (info.version != kVersion) fail("unknown format version");
    }
    if (!std::getline(in, line) || line.rfind("config ", 0) != 0) fail("missing config echo");
    info.config_echo = line.substr(7);
    if (!std::getline(in, line)) fail("missing t/step");
    {
        std::istringstream ls(line);
        std::string kw1, tval, kw2;
        ls >> kw1 >> tval >> kw2 >> info.step;
        if (kw1 != "t" || kw2 != "step") fail("bad t/step line");
        info.t = parse_hexfloat(tval);
    }
    if (!std::getline(in, line)) fail("missing integrals");
    {
        std::istringstream ls(line);
        std::string kw, a, b;
        ls >> kw >> a >> b;
        if (kw != "integrals") fail("bad integrals line");
        info.integrals.dissipation = parse_hexfloat(a);
        info.integrals.work = parse_hexfloat(b);
    }
    if (!std::getline(in, line)) fail("missing grid");
    {
        std::istringstream ls(line);
        std::string kw, p, f;
        ls >> kw >> info.grid.dimension >> info.grid.resolution >> p >> f;
        if (kw != "grid") fail("bad grid line");
        info.grid.period = parse_hexfloat(p);
        info.grid.dealias_fraction = parse_hexfloat(f);
    }
    if (!std::getline(in, line)) fail("missing data header");
    {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw >> info.value_count;
        if (kw != "data") fail("bad data line");
    }
    return info;
}

} // namespace

CheckpointInfo read_checkpoint_info(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return read_header(in, path);
}

SolverState read_checkpoint(const std::string& path, LatticePtr lattice) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    const CheckpointInfo info = read_header(in, path);
    if (info.grid != lattice->spec())
        throw ShapeError("checkpoint grid does not match the requested lattice");

    const auto order = lexicographic_modes(*lattice);
    const std::size_t expect = order.size() * static_cast<std::size_t>(lattice->dim()) * 2;
    if (info.value_count != expect)
        throw std::runtime_error("checkpoint value count does not match the grid");

    std::string body(expect * 8, '\0');
    in.read(body.data(), static_cast<std::streamsize>(body.size()));
    if (static_cast<std::size_t>(in.gcount()) != body.size())
        throw std::runtime_error("truncated checkpoint payload: " + path);

    SolverState state;
    state.t = info.t;
    state.step = info.step;
    state.integrals = info.integrals;
    state.v = SpectralField(lattice);
    const char* p = body.data();
    for (const auto* m : order)
        for (int c = 0; c < lattice->dim(); ++c) {
            const double re = get_le_double(p);
            p += 8;
            const double im = get_le_double(p);
            p += 8;
            state.v.at(c, m->index) = {re, im};
        }
    return state;
}

} // namespace specbox
