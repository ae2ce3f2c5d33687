#pragma once

#include "specbox/ensemble.hpp"
#include "specbox/solver.hpp"

#include <string>

namespace specbox {

/// One retained mode with a per-component complex amplitude.
struct ModeAmp {
    std::array<int, 3> wavevector = {0, 0, 0};
    std::vector<std::complex<double>> amplitude;
};

struct FieldSpecConfig {
    std::vector<ModeAmp> modes;
};

struct InitialConfig {
    enum class Kind { Zero, Modes, TaylorGreen, Random };
    Kind kind = Kind::Zero;
    FieldSpecConfig modes;
    double amplitude = 1.0;  // taylor_green / random
    double decay = 2.0;      // random spectrum falloff
    std::uint64_t seed = 1;
};

struct ForcingConfig {
    enum class Kind { Steady, ConvergentToSteady, TimePeriodic, Bursts, RandomPhases };
    Kind kind = Kind::Steady;
    FieldSpecConfig base;       // steady / time_periodic
    FieldSpecConfig limit;      // convergent_to_steady
    FieldSpecConfig transient;  // convergent_to_steady
    FieldSpecConfig modulation; // time_periodic
    FieldSpecConfig pulse;      // bursts
    double rate = 1.0;
    double angular_frequency = 1.0;
    double pulse_width = 0.25;
    double period = 1.0;
    std::vector<std::pair<std::array<int, 3>, double>> phase_modes;  // random_phases
    double correlation_time = 1.0;
    std::uint64_t seed = 0;
};

struct EnsembleSection {
    bool enabled = false;
    int n = 4;
    double amplitude = 0.0;
    std::vector<std::array<int, 3>> schedule;
    int jobs = 1;
};

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv", "json", "checkpoint"};
};

/// The whole experiment description; parses from and serializes to JSON
/// losslessly, rejecting unknown keys.
struct ExperimentConfig {
    GridSpec grid;
    double viscosity = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    std::uint64_t sample_stride = 1;
    InitialConfig initial;
    ForcingConfig forcing;
    std::vector<double> horizons;  // defaults to {t_end}
    EnsembleSection ensemble;
    OutputSection output;
    std::uint64_t seed = 0;

    std::string to_json(int indent = -1) const;

    SpectralField build_initial(const LatticePtr& lattice) const;
    ForcingSpec build_forcing(const LatticePtr& lattice) const;
    SolverConfig build_solver_config(const LatticePtr& lattice) const;
    EnsembleConfig build_ensemble_config(const LatticePtr& lattice) const;
};

/// Parses and validates; throws ConfigError carrying every violation found.
ExperimentConfig parse_config(const std::string& text);

} // namespace specbox
