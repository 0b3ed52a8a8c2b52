#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "cavtraj/config.hpp"
#include "cavtraj/ensemble.hpp"

namespace cavtraj {

/// Everything a run needs beyond the configuration itself.
struct Prepared {
    RunConfig config;  // cavity wavenumber resolved when targeting a mode
    GridPtr grid;
    std::shared_ptr<const GroundState> ground;
    std::shared_ptr<const BdGModeSet> modes;  // null when no modes are needed
    ValidityReport validity;
    /// Overlap of the chosen cavity mode with the targeted BdG mode.
    double target_overlap = std::numeric_limits<double>::quiet_NaN();
};

/// Solve the ground state (and BdG modes when recording populations,
/// sampling noise or targeting a mode), then run the validity checks.
/// With strict validity any warning becomes a ConfigError.
Prepared prepare(const RunConfig& config);

/// Wavenumber in [k_min, k_max] maximising |O_j| for the cavity's phase offset.
double best_wavenumber(const BdGModeSet& modes, const CavitySpec& cavity, int mode, double k_min,
                       double k_max, std::size_t samples);

RecorderConfig make_recorder(const Prepared& p);
EnsembleConfig make_ensemble_config(const Prepared& p);

struct WavelengthPoint {
    double wavenumber = 0.0;
    double overlap = 0.0;  // O_1
    Estimate mode_population;  // mode 1 at the scan time
    Estimate abs_q1;
};

/// For each cavity wavenumber, run an ensemble to config.scan.time and
/// report the population of `mode` and <|q1|> there.
std::vector<WavelengthPoint> wavelength_scan(const Prepared& p, int mode = 1);

}  // namespace cavtraj
