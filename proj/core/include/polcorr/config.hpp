#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "polcorr/analysis.hpp"
#include "polcorr/detector.hpp"
#include "polcorr/geometry.hpp"
#include "polcorr/sampling.hpp"
#include "polcorr/selection.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
/*!
 * Complete configuration of a simulation + analysis run.
 *
 * Defaults reproduce the measured setup. Values derived from others
 * (B rotation, scatterer read-out, selection resolutions) are filled in by
 * \c resolve() and are not separate keys.
 */
struct RunConfig
{
    std::uint64_t n_pairs = 1'000'000;

    double kappa = 1.0;
    double theta_scat_deg = 0.0;
    Mode mode = Mode::direct;

    SetupGeometry geometry;
    TransportConfig transport;
    SelectionConfig selection;
    AnalysisOptions analysis;

    std::uint64_t master_seed = 1;
    unsigned streams = 1;  //!< worker threads; results do not depend on it
    std::string output_prefix = "polcorr";

    //! Propagate model settings into geometry/selection and validate.
    void resolve();

    PairModel pair_model() const;
};

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/*!
 * Parse the INI-style format:
 *
 *   # comment
 *   [section]
 *   key = value
 *
 * Unknown sections or keys, duplicates and malformed values throw
 * ConfigError with the offending line number. Missing keys keep their
 * defaults; theta2 window and the passive B distance default from the mode
 * and scatter angle.
 */
RunConfig parse_config(std::string_view text);
RunConfig load_config(std::string const& path);

//! Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(RunConfig const& cfg);

//! FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
std::string config_hash(RunConfig const& cfg);

} // namespace polcorr
