#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "polcorr/analysis.hpp"
#include "polcorr/detector.hpp"
#include "polcorr/selection.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
// Event files: one CSV row per fired pixel, rows grouped by event_id.
//
//   event_id,detector,ix,iy,energy_kev,time_ns
//
// With truth enabled the rows carry five more columns (truth_theta1,
// truth_theta2, truth_dphi, truth_thetascat, truth_first_pixel). Events
// without any fired pixel are not written.
//---------------------------------------------------------------------------//
void write_events(std::ostream& os, std::span<EventRecord const> events, bool with_truth);
void write_events_file(std::string const& path, std::span<EventRecord const> events, bool with_truth);

//! Throws IoError on malformed rows or out-of-order event ids.
std::vector<EventRecord> read_events(std::istream& is);
std::vector<EventRecord> read_events_file(std::string const& path);

void write_cutflow_file(std::string const& path, CutflowReport const& report);

//! bin_low_deg,bin_high_deg,raw,mixed,corrected,corrected_err (mixed normalised to raw)
void write_histogram(std::ostream& os, DeltaPhiHistogram const& hist);
void write_histogram_file(std::string const& path, DeltaPhiHistogram const& hist);

std::string fit_json(FitResult const& fit, std::size_t n_events);
void write_text_file(std::string const& path, std::string const& text);
std::string read_text_file(std::string const& path);

} // namespace polcorr
