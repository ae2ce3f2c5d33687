#include "specbox/config.hpp"

#include "specbox/presets.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

namespace specbox {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Collector {
    std::vector<ConfigViolation> violations;

    void add(const std::string& path, const std::string& msg) { violations.push_back({path, msg}); }

    /// Flags keys outside the allowed set.
    void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            add(path, "must be an object");
            return;
        }
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key)) add(path + "." + key, "unknown key");
    }

    bool has(const json& j, const char* key) const { return j.is_object() && j.contains(key); }

    double number(const json& j, const std::string& path, const char* key, double fallback,
                  bool required = false) {
        if (!has(j, key)) {
            if (required) add(path + "." + key, "missing required key");
            return fallback;
        }
        if (!j.at(key).is_number()) {
            add(path + "." + key, "must be a number");
            return fallback;
        }
        return j.at(key).get<double>();
    }

    std::int64_t integer(const json& j, const std::string& path, const char* key,
                         std::int64_t fallback, bool required = false) {
        if (!has(j, key)) {
            if (required) add(path + "." + key, "missing required key");
            return fallback;
        }
        if (!j.at(key).is_number_integer()) {
            add(path + "." + key, "must be an integer");
            return fallback;
        }
        return j.at(key).get<std::int64_t>();
    }

    bool boolean(const json& j, const std::string& path, const char* key, bool fallback) {
        if (!has(j, key)) return fallback;
        if (!j.at(key).is_boolean()) {
            add(path + "." + key, "must be a boolean");
            return fallback;
        }
        return j.at(key).get<bool>();
    }

    std::string text(const json& j, const std::string& path, const char* key,
                     const std::string& fallback) {
        if (!has(j, key)) return fallback;
        if (!j.at(key).is_string()) {
            add(path + "." + key, "must be a string");
            return fallback;
        }
        return j.at(key).get<std::string>();
    }
};

std::array<int, 3> parse_wavevector(Collector& c, const json& j, const std::string& path,
                                    int dim) {
    std::array<int, 3> out = {0, 0, 0};
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        c.add(path, "must be an integer array of length " + std::to_string(dim));
        return out;
    }
    for (int a = 0; a < dim; ++a) {
        if (!j[static_cast<std::size_t>(a)].is_number_integer()) {
            c.add(path, "components must be integers");
            return out;
        }
        out[static_cast<std::size_t>(a)] = j[static_cast<std::size_t>(a)].get<int>();
    }
    return out;
}

FieldSpecConfig parse_field(Collector& c, const json& j, const std::string& path, int dim) {
    FieldSpecConfig out;
    c.check_keys(j, path, {"modes"});
    if (!j.is_object() || !j.contains("modes")) {
        c.add(path + ".modes", "missing required key");
        return out;
    }
    const auto& modes = j.at("modes");
    if (!modes.is_array()) {
        c.add(path + ".modes", "must be an array");
        return out;
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string mp = path + ".modes[" + std::to_string(i) + "]";
        const auto& m = modes[i];
        c.check_keys(m, mp, {"wavevector", "amplitude"});
        ModeAmp ma;
        if (m.contains("wavevector"))
            ma.wavevector = parse_wavevector(c, m.at("wavevector"), mp + ".wavevector", dim);
        else
            c.add(mp + ".wavevector", "missing required key");
        if (!m.contains("amplitude") || !m.at("amplitude").is_array() ||
            static_cast<int>(m.at("amplitude").size()) != dim) {
            c.add(mp + ".amplitude", "must be an array of [re, im] pairs, one per component");
            continue;
        }
        for (const auto& comp : m.at("amplitude")) {
            if (!comp.is_array() || comp.size() != 2 || !comp[0].is_number() ||
                !comp[1].is_number()) {
                c.add(mp + ".amplitude", "components must be [re, im] number pairs");
                ma.amplitude.clear();
                break;
            }
            ma.amplitude.emplace_back(comp[0].get<double>(), comp[1].get<double>());
        }
        if (!ma.amplitude.empty()) out.modes.push_back(std::move(ma));
    }
    return out;
}

ordered_json field_to_json(const FieldSpecConfig& f, int dim) {
    ordered_json out;
    out["modes"] = ordered_json::array();
    for (const auto& m : f.modes) {
        ordered_json jm;
        jm["wavevector"] = std::vector<int>(m.wavevector.begin(), m.wavevector.begin() + dim);
        ordered_json amps = ordered_json::array();
        for (const auto& a : m.amplitude) amps.push_back({a.real(), a.imag()});
        jm["amplitude"] = amps;
        out["modes"].push_back(jm);
    }
    return out;
}

/// Builds the dense field from a mode list; flags non-retained wavevectors
/// and amplitudes that are not divergence-free.
SpectralField build_field(const FieldSpecConfig& f, const LatticePtr& lattice,
                          std::vector<ConfigViolation>* out, const std::string& path) {
    SpectralField field(lattice);
    for (std::size_t i = 0; i < f.modes.size(); ++i) {
        const auto& m = f.modes[i];
        const std::string mp = path + ".modes[" + std::to_string(i) + "]";
        if (!lattice->is_retained(m.wavevector)) {
            if (out) out->push_back({mp + ".wavevector", "outside the retained lattice"});
            continue;
        }
        std::complex<double> dot{};
        double scale = 0.0;
        for (int c = 0; c < lattice->dim(); ++c) {
            dot += static_cast<double>(m.wavevector[static_cast<std::size_t>(c)]) *
                   m.amplitude[static_cast<std::size_t>(c)];
            scale += std::abs(m.amplitude[static_cast<std::size_t>(c)]);
        }
        if (std::abs(dot) > 1e-12 * std::max(scale, 1e-30)) {
            if (out)
                out->push_back({mp + ".amplitude", "not perpendicular to the wavevector"});
            continue;
        }
        field.add_mode(m.wavevector, m.amplitude);
    }
    return field;
}

const char* initial_kind_name(InitialConfig::Kind k) {
    switch (k) {
        case InitialConfig::Kind::Zero: return "zero";
        case InitialConfig::Kind::Modes: return "modes";
        case InitialConfig::Kind::TaylorGreen: return "taylor_green";
        case InitialConfig::Kind::Random: return "random";
    }
    return "zero";
}

const char* forcing_kind_name(ForcingConfig::Kind k) {
    switch (k) {
        case ForcingConfig::Kind::Steady: return "steady";
        case ForcingConfig::Kind::ConvergentToSteady: return "convergent_to_steady";
        case ForcingConfig::Kind::TimePeriodic: return "time_periodic";
        case ForcingConfig::Kind::Bursts: return "bursts";
        case ForcingConfig::Kind::RandomPhases: return "random_phases";
    }
    return "steady";
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::vector<ConfigViolation>{{"", std::string("invalid JSON: ") + e.what()}});
    }

    Collector c;
    ExperimentConfig cfg;
    c.check_keys(j, "", {"schema_version", "domain", "physics", "time", "initial", "forcing",
                         "averaging", "ensemble", "output", "seed"});
    const std::string schema = c.text(j, "", "schema_version", "specbox-config-1");
    if (schema != "specbox-config-1") c.add("schema_version", "unknown schema version");

    // domain
    {
        if (!c.has(j, "domain")) {
            c.add("domain", "missing required key");
        } else {
            const auto& d = j.at("domain");
            c.check_keys(d, "domain", {"dimension", "resolution", "period", "dealias_fraction"});
            cfg.grid.dimension = static_cast<int>(c.integer(d, "domain", "dimension", 2, true));
            cfg.grid.resolution = static_cast<int>(c.integer(d, "domain", "resolution", 32, true));
            cfg.grid.period = c.number(d, "domain", "period", kTwoPi);
            cfg.grid.dealias_fraction = c.number(d, "domain", "dealias_fraction", 2.0 / 3.0);
        }
        if (cfg.grid.dimension != 2 && cfg.grid.dimension != 3)
            c.add("domain.dimension", "must be 2 or 3");
        const int n = cfg.grid.resolution;
        if (n < 8 || (n & (n - 1)) != 0)
            c.add("domain.resolution", "must be a power of two >= 8");
        if (!(cfg.grid.period > 0.0)) c.add("domain.period", "must be positive");
        if (!(cfg.grid.dealias_fraction > 0.0) || cfg.grid.dealias_fraction > 1.0)
            c.add("domain.dealias_fraction", "must lie in (0, 1]");
    }
    // physics
    if (c.has(j, "physics")) {
        c.check_keys(j.at("physics"), "physics", {"viscosity"});
        cfg.viscosity = c.number(j.at("physics"), "physics", "viscosity", 1.0, true);
    } else {
        c.add("physics", "missing required key");
    }
    if (!(cfg.viscosity > 0.0)) c.add("physics.viscosity", "must be positive");
    // time
    if (c.has(j, "time")) {
        const auto& t = j.at("time");
        c.check_keys(t, "time", {"dt", "t_end", "sample_stride"});
        cfg.dt = c.number(t, "time", "dt", 1e-3, true);
        cfg.t_end = c.number(t, "time", "t_end", 1.0, true);
        cfg.sample_stride = static_cast<std::uint64_t>(c.integer(t, "time", "sample_stride", 1));
    } else {
        c.add("time", "missing required key");
    }
    if (!(cfg.dt > 0.0)) c.add("time.dt", "must be positive");
    if (!(cfg.t_end >= 0.0)) c.add("time.t_end", "must be nonnegative");
    if (cfg.sample_stride < 1) c.add("time.sample_stride", "must be >= 1");

    const int dim = (cfg.grid.dimension == 3) ? 3 : 2;

    // initial
    if (c.has(j, "initial")) {
        const auto& ini = j.at("initial");
        c.check_keys(ini, "initial", {"kind", "modes", "amplitude", "decay", "seed"});
        const std::string kind = c.text(ini, "initial", "kind", "zero");
        if (kind == "zero") cfg.initial.kind = InitialConfig::Kind::Zero;
        else if (kind == "modes") cfg.initial.kind = InitialConfig::Kind::Modes;
        else if (kind == "taylor_green") cfg.initial.kind = InitialConfig::Kind::TaylorGreen;
        else if (kind == "random") cfg.initial.kind = InitialConfig::Kind::Random;
        else c.add("initial.kind", "unknown kind");
        if (cfg.initial.kind == InitialConfig::Kind::Modes) {
            if (ini.contains("modes"))
                cfg.initial.modes = parse_field(c, json{{"modes", ini.at("modes")}},
                                                "initial", dim);
            else
                c.add("initial.modes", "missing required key");
        }
        cfg.initial.amplitude = c.number(ini, "initial", "amplitude", 1.0);
        cfg.initial.decay = c.number(ini, "initial", "decay", 2.0);
        cfg.initial.seed = static_cast<std::uint64_t>(c.integer(ini, "initial", "seed", 1));
        if (cfg.initial.kind == InitialConfig::Kind::TaylorGreen && cfg.grid.dimension != 2)
            c.add("initial.kind", "taylor_green requires dimension 2");
    }
    // forcing
    if (c.has(j, "forcing")) {
        const auto& fo = j.at("forcing");
        const std::string kind = c.text(fo, "forcing", "kind", "steady");
        auto sub = [&](const char* key, bool required) {
            FieldSpecConfig out;
            if (fo.contains(key))
                out = parse_field(c, fo.at(key), std::string("forcing.") + key, dim);
            else if (required)
                c.add(std::string("forcing.") + key, "missing required key");
            return out;
        };
        if (kind == "steady") {
            cfg.forcing.kind = ForcingConfig::Kind::Steady;
            c.check_keys(fo, "forcing", {"kind", "base"});
            cfg.forcing.base = sub("base", true);
        } else if (kind == "convergent_to_steady") {
            cfg.forcing.kind = ForcingConfig::Kind::ConvergentToSteady;
            c.check_keys(fo, "forcing", {"kind", "limit", "transient", "rate"});
            cfg.forcing.limit = sub("limit", true);
            cfg.forcing.transient = sub("transient", true);
            cfg.forcing.rate = c.number(fo, "forcing", "rate", 1.0, true);
            if (!(cfg.forcing.rate > 0.0)) c.add("forcing.rate", "must be positive");
        } else if (kind == "time_periodic") {
            cfg.forcing.kind = ForcingConfig::Kind::TimePeriodic;
            c.check_keys(fo, "forcing", {"kind", "base", "modulation", "angular_frequency"});
            cfg.forcing.base = sub("base", true);
            cfg.forcing.modulation = sub("modulation", true);
            cfg.forcing.angular_frequency =
                c.number(fo, "forcing", "angular_frequency", 1.0, true);
            if (!(cfg.forcing.angular_frequency > 0.0))
                c.add("forcing.angular_frequency", "must be positive");
        } else if (kind == "bursts") {
            cfg.forcing.kind = ForcingConfig::Kind::Bursts;
            c.check_keys(fo, "forcing", {"kind", "pulse", "pulse_width", "period"});
            cfg.forcing.pulse = sub("pulse", true);
            cfg.forcing.pulse_width = c.number(fo, "forcing", "pulse_width", 0.25, true);
            cfg.forcing.period = c.number(fo, "forcing", "period", 1.0, true);
            if (!(cfg.forcing.pulse_width > 0.0) || cfg.forcing.pulse_width > 1.0)
                c.add("forcing.pulse_width", "must lie in (0, 1]");
            if (!(cfg.forcing.period >= 1.0)) c.add("forcing.period", "must be >= 1");
        } else if (kind == "random_phases") {
            cfg.forcing.kind = ForcingConfig::Kind::RandomPhases;
            c.check_keys(fo, "forcing", {"kind", "modes", "correlation_time", "seed"});
            if (fo.contains("modes") && fo.at("modes").is_array()) {
                for (std::size_t i = 0; i < fo.at("modes").size(); ++i) {
                    const auto& m = fo.at("modes")[i];
                    const std::string mp = "forcing.modes[" + std::to_string(i) + "]";
                    c.check_keys(m, mp, {"wavevector", "amplitude"});
                    std::array<int, 3> wv = {0, 0, 0};
                    if (m.contains("wavevector"))
                        wv = parse_wavevector(c, m.at("wavevector"), mp + ".wavevector", dim);
                    else
                        c.add(mp + ".wavevector", "missing required key");
                    double amp = 0.0;
                    if (m.contains("amplitude") && m.at("amplitude").is_number())
                        amp = m.at("amplitude").get<double>();
                    else
                        c.add(mp + ".amplitude", "must be a number");
                    cfg.forcing.phase_modes.emplace_back(wv, amp);
                }
            } else {
                c.add("forcing.modes", "missing required key");
            }
            cfg.forcing.correlation_time = c.number(fo, "forcing", "correlation_time", 1.0, true);
            if (!(cfg.forcing.correlation_time > 0.0))
                c.add("forcing.correlation_time", "must be positive");
            cfg.forcing.seed = static_cast<std::uint64_t>(c.integer(fo, "forcing", "seed", 0));
        } else {
            c.add("forcing.kind", "unknown kind");
        }
    } else {
        c.add("forcing", "missing required key");
    }
    // averaging
    if (c.has(j, "averaging")) {
        const auto& av = j.at("averaging");
        c.check_keys(av, "averaging", {"horizons"});
        if (av.contains("horizons")) {
            if (!av.at("horizons").is_array()) {
                c.add("averaging.horizons", "must be an array of numbers");
            } else {
                for (const auto& h : av.at("horizons")) {
                    if (!h.is_number()) {
                        c.add("averaging.horizons", "must be an array of numbers");
                        break;
                    }
                    cfg.horizons.push_back(h.get<double>());
                }
            }
        }
    }
    if (cfg.horizons.empty() && cfg.t_end > 0.0) cfg.horizons = {cfg.t_end};
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
        const std::string hp = "averaging.horizons[" + std::to_string(i) + "]";
        if (!(cfg.horizons[i] > 0.0)) c.add(hp, "must be positive");
        if (cfg.horizons[i] > cfg.t_end * (1 + 1e-12)) c.add(hp, "exceeds t_end");
        if (i > 0 && cfg.horizons[i] <= cfg.horizons[i - 1]) c.add(hp, "must be increasing");
        if (cfg.dt > 0.0 && cfg.sample_stride >= 1) {
            const double per = cfg.dt * static_cast<double>(cfg.sample_stride);
            const double k = cfg.horizons[i] / per;
            if (std::abs(k - std::llround(k)) > 1e-9 * std::max(1.0, k))
                c.add(hp, "must be an integer number of sample intervals");
        }
    }
    // ensemble
    if (c.has(j, "ensemble")) {
        const auto& en = j.at("ensemble");
        c.check_keys(en, "ensemble", {"enabled", "n", "amplitude", "schedule", "jobs"});
        cfg.ensemble.enabled = c.boolean(en, "ensemble", "enabled", false);
        cfg.ensemble.n = static_cast<int>(c.integer(en, "ensemble", "n", 4));
        cfg.ensemble.amplitude = c.number(en, "ensemble", "amplitude", 0.0);
        cfg.ensemble.jobs = static_cast<int>(c.integer(en, "ensemble", "jobs", 1));
        if (en.contains("schedule")) {
            if (!en.at("schedule").is_array()) {
                c.add("ensemble.schedule", "must be an array of wavevectors");
            } else {
                for (std::size_t i = 0; i < en.at("schedule").size(); ++i)
                    cfg.ensemble.schedule.push_back(
                        parse_wavevector(c, en.at("schedule")[i],
                                         "ensemble.schedule[" + std::to_string(i) + "]", dim));
            }
        }
        if (cfg.ensemble.enabled) {
            if (cfg.ensemble.n < 1) c.add("ensemble.n", "must be >= 1");
            if (cfg.ensemble.jobs < 1) c.add("ensemble.jobs", "must be >= 1");
            if (static_cast<int>(cfg.ensemble.schedule.size()) < cfg.ensemble.n)
                c.add("ensemble.schedule", "shorter than n");
        }
    }
    // output
    if (c.has(j, "output")) {
        const auto& o = j.at("output");
        c.check_keys(o, "output", {"directory", "formats"});
        cfg.output.directory = c.text(o, "output", "directory", "out");
        if (o.contains("formats")) {
            cfg.output.formats.clear();
            if (!o.at("formats").is_array()) {
                c.add("output.formats", "must be an array of strings");
            } else {
                for (const auto& f : o.at("formats")) {
                    if (!f.is_string()) {
                        c.add("output.formats", "must be an array of strings");
                        break;
                    }
                    const std::string s = f.get<std::string>();
                    if (s != "csv" && s != "json" && s != "checkpoint")
                        c.add("output.formats", "unknown format: " + s);
                    cfg.output.formats.push_back(s);
                }
            }
        }
    }
    cfg.seed = static_cast<std::uint64_t>(c.integer(j, "", "seed", 0));

    // Field-level validation needs a lattice; skip when the grid is broken.
    if (c.violations.empty()) {
        auto lattice = make_lattice(cfg.grid);
        if (cfg.initial.kind == InitialConfig::Kind::Modes)
            build_field(cfg.initial.modes, lattice, &c.violations, "initial");
        auto check = [&](const FieldSpecConfig& f, const char* name) {
            build_field(f, lattice, &c.violations, std::string("forcing.") + name);
        };
        switch (cfg.forcing.kind) {
            case ForcingConfig::Kind::Steady: check(cfg.forcing.base, "base"); break;
            case ForcingConfig::Kind::ConvergentToSteady:
                check(cfg.forcing.limit, "limit");
                check(cfg.forcing.transient, "transient");
                break;
            case ForcingConfig::Kind::TimePeriodic:
                check(cfg.forcing.base, "base");
                check(cfg.forcing.modulation, "modulation");
                break;
            case ForcingConfig::Kind::Bursts: check(cfg.forcing.pulse, "pulse"); break;
            case ForcingConfig::Kind::RandomPhases:
                for (std::size_t i = 0; i < cfg.forcing.phase_modes.size(); ++i)
                    if (!lattice->is_retained(cfg.forcing.phase_modes[i].first))
                        c.add("forcing.modes[" + std::to_string(i) + "].wavevector",
                              "outside the retained lattice");
                break;
        }
        for (std::size_t i = 0; i < cfg.ensemble.schedule.size(); ++i)
            if (cfg.ensemble.enabled && !lattice->is_retained(cfg.ensemble.schedule[i]))
                c.add("ensemble.schedule[" + std::to_string(i) + "]",
                      "outside the retained lattice");
    }

    if (!c.violations.empty()) throw ConfigError(std::move(c.violations));
    return cfg;
}

std::string ExperimentConfig::to_json(int indent) const {
    const int dim = grid.dimension;
    ordered_json j;
    j["schema_version"] = "specbox-config-1";
    j["domain"] = {{"dimension", grid.dimension},
                   {"resolution", grid.resolution},
                   {"period", grid.period},
                   {"dealias_fraction", grid.dealias_fraction}};
    j["physics"] = {{"viscosity", viscosity}};
    j["time"] = {{"dt", dt}, {"t_end", t_end}, {"sample_stride", sample_stride}};
    ordered_json ini;
    ini["kind"] = initial_kind_name(initial.kind);
    if (initial.kind == InitialConfig::Kind::Modes)
        ini["modes"] = field_to_json(initial.modes, dim)["modes"];
    if (initial.kind == InitialConfig::Kind::TaylorGreen ||
        initial.kind == InitialConfig::Kind::Random)
        ini["amplitude"] = initial.amplitude;
    if (initial.kind == InitialConfig::Kind::Random) {
        ini["decay"] = initial.decay;
        ini["seed"] = initial.seed;
    }
    j["initial"] = ini;
    ordered_json fo;
    fo["kind"] = forcing_kind_name(forcing.kind);
    switch (forcing.kind) {
        case ForcingConfig::Kind::Steady:
            fo["base"] = field_to_json(forcing.base, dim);
            break;
        case ForcingConfig::Kind::ConvergentToSteady:
            fo["limit"] = field_to_json(forcing.limit, dim);
            fo["transient"] = field_to_json(forcing.transient, dim);
            fo["rate"] = forcing.rate;
            break;
        case ForcingConfig::Kind::TimePeriodic:
            fo["base"] = field_to_json(forcing.base, dim);
            fo["modulation"] = field_to_json(forcing.modulation, dim);
            fo["angular_frequency"] = forcing.angular_frequency;
            break;
        case ForcingConfig::Kind::Bursts:
            fo["pulse"] = field_to_json(forcing.pulse, dim);
            fo["pulse_width"] = forcing.pulse_width;
            fo["period"] = forcing.period;
            break;
        case ForcingConfig::Kind::RandomPhases: {
            ordered_json modes = ordered_json::array();
            for (const auto& [wv, amp] : forcing.phase_modes) {
                ordered_json m;
                m["wavevector"] = std::vector<int>(wv.begin(), wv.begin() + dim);
                m["amplitude"] = amp;
                modes.push_back(m);
            }
            fo["modes"] = modes;
            fo["correlation_time"] = forcing.correlation_time;
            fo["seed"] = forcing.seed;
            break;
        }
    }
    j["forcing"] = fo;
    j["averaging"] = {{"horizons", horizons}};
    ordered_json en;
    en["enabled"] = ensemble.enabled;
    en["n"] = ensemble.n;
    en["amplitude"] = ensemble.amplitude;
    ordered_json sched = ordered_json::array();
    for (const auto& q : ensemble.schedule)
        sched.push_back(std::vector<int>(q.begin(), q.begin() + dim));
    en["schedule"] = sched;
    en["jobs"] = ensemble.jobs;
    j["ensemble"] = en;
    j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
    j["seed"] = seed;
    return indent >= 0 ? j.dump(indent) : j.dump();
}

SpectralField ExperimentConfig::build_initial(const LatticePtr& lattice) const {
    switch (initial.kind) {
        case InitialConfig::Kind::Zero: return SpectralField(lattice);
        case InitialConfig::Kind::Modes: return build_field(initial.modes, lattice, nullptr, "");
        case InitialConfig::Kind::TaylorGreen: return taylor_green(lattice, initial.amplitude);
        case InitialConfig::Kind::Random:
            return random_div_free(lattice, initial.seed ^ seed, initial.amplitude,
                                   initial.decay);
    }
    return SpectralField(lattice);
}

ForcingSpec ExperimentConfig::build_forcing(const LatticePtr& lattice) const {
    switch (forcing.kind) {
        case ForcingConfig::Kind::Steady:
            return ForcingSpec(SteadyForcing{build_field(forcing.base, lattice, nullptr, "")});
        case ForcingConfig::Kind::ConvergentToSteady:
            return ForcingSpec(ConvergentToSteadyForcing{
                build_field(forcing.limit, lattice, nullptr, ""),
                build_field(forcing.transient, lattice, nullptr, ""), forcing.rate});
        case ForcingConfig::Kind::TimePeriodic:
            return ForcingSpec(TimePeriodicForcing{
                build_field(forcing.base, lattice, nullptr, ""),
                build_field(forcing.modulation, lattice, nullptr, ""),
                forcing.angular_frequency});
        case ForcingConfig::Kind::Bursts:
            return ForcingSpec(BurstsForcing{build_field(forcing.pulse, lattice, nullptr, ""),
                                             forcing.pulse_width, forcing.period});
        case ForcingConfig::Kind::RandomPhases: {
            RandomPhasesForcing rp;
            for (const auto& [wv, amp] : forcing.phase_modes)
                rp.modes.push_back({wv, amp});
            rp.correlation_time = forcing.correlation_time;
            rp.seed = forcing.seed ^ seed;
            rp.lattice = lattice;
            return ForcingSpec(std::move(rp));
        }
    }
    return ForcingSpec(SteadyForcing{SpectralField(lattice)});
}

SolverConfig ExperimentConfig::build_solver_config(const LatticePtr& lattice) const {
    SolverConfig sc;
    sc.lattice = lattice;
    sc.viscosity = viscosity;
    sc.dt = dt;
    sc.t_end = t_end;
    sc.sample_stride = sample_stride;
    sc.forcing = build_forcing(lattice);
    sc.initial = build_initial(lattice);
    return sc;
}

EnsembleConfig ExperimentConfig::build_ensemble_config(const LatticePtr& lattice) const {
    EnsembleConfig ec;
    ec.lattice = lattice;
    // The ensemble mean force is the steady part of the configured forcing.
    switch (forcing.kind) {
        case ForcingConfig::Kind::Steady:
            ec.family.f_bar = build_field(forcing.base, lattice, nullptr, "");
            break;
        case ForcingConfig::Kind::ConvergentToSteady:
            ec.family.f_bar = build_field(forcing.limit, lattice, nullptr, "");
            break;
        case ForcingConfig::Kind::TimePeriodic:
            ec.family.f_bar = build_field(forcing.base, lattice, nullptr, "");
            break;
        default:
            throw ConfigError(std::vector<ConfigViolation>{
                {"forcing.kind", "ensemble mode requires a forcing with a steady part"}});
    }
    ec.family.perturbation_amplitude = ensemble.amplitude;
    ec.family.wavevector_schedule = ensemble.schedule;
    ec.family.seed = seed;
    ec.n = ensemble.n;
    ec.viscosity = viscosity;
    ec.dt = dt;
    ec.horizon = t_end;
    ec.sample_stride = sample_stride;
    ec.jobs = ensemble.jobs;
    return ec;
}

} // namespace specbox
