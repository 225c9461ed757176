#include "polcorr/event_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "polcorr/errors.hpp"

namespace polcorr
{
namespace
{
constexpr std::string_view kHeader = "event_id,detector,ix,iy,energy_kev,time_ns";
constexpr std::string_view kTruthHeader
    = ",truth_theta1,truth_theta2,truth_dphi,truth_thetascat,truth_first_pixel";

template<class T>
T field(std::string_view s, std::size_t line)
{
    T value{};
    auto const* end = s.data() + s.size();
    auto const [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw IoError(fmt::format("events line {}: bad field '{}'", line, s));
    return value;
}

std::ofstream open_out(std::string const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(fmt::format("cannot open '{}' for writing", path));
    return out;
}

std::ifstream open_in(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(fmt::format("cannot open '{}'", path));
    return in;
}
} // namespace

void write_events(std::ostream& os, std::span<EventRecord const> events, bool with_truth)
{
    fmt::memory_buffer buf;
    auto flush = [&] {
        os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        buf.clear();
    };
    fmt::format_to(std::back_inserter(buf), "{}{}\n", kHeader, with_truth ? kTruthHeader : "");
    for (auto const& ev : events)
    {
        if (with_truth && !ev.truth)
            throw IoError(fmt::format("event {} has no truth block", ev.event_id));
        for (auto const& h : ev.hits)
        {
            fmt::format_to(std::back_inserter(buf),
                           "{},{},{},{},{:.3f},{:.4f}",
                           ev.event_id,
                           static_cast<char>(h.detector),
                           h.ix,
                           h.iy,
                           h.energy_kev,
                           h.time_ns);
            if (with_truth)
            {
                auto const& t = *ev.truth;
                fmt::format_to(std::back_inserter(buf),
                               ",{:.4f},{:.4f},{:.4f},{:.4f},{}",
                               t.theta1_deg,
                               t.theta2_deg,
                               t.delta_phi_deg,
                               t.theta_scat_deg,
                               h.truth_order == 1 ? 1 : 0);
            }
            buf.push_back('\n');
        }
        if (buf.size() > (1u << 16))
            flush();
    }
    flush();
    if (!os)
        throw IoError("failed writing event stream");
}

void write_events_file(std::string const& path, std::span<EventRecord const> events, bool with_truth)
{
    auto out = open_out(path);
    write_events(out, events, with_truth);
}

std::vector<EventRecord> read_events(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw IoError("events: empty input");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    bool with_truth = false;
    if (line == std::string(kHeader) + std::string(kTruthHeader))
        with_truth = true;
    else if (line != kHeader)
        throw IoError(fmt::format("events: unexpected header '{}'", line));
    std::size_t const n_fields = with_truth ? 11 : 6;

    std::vector<EventRecord> events;
    std::string_view fields[11];
    std::size_t line_no = 1;
    while (std::getline(is, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;

        std::string_view rest(line);
        std::size_t n = 0;
        while (true)
        {
            auto const comma = rest.find(',');
            if (n == n_fields)
                throw IoError(fmt::format("events line {}: too many fields", line_no));
            fields[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (n != n_fields)
            throw IoError(fmt::format("events line {}: expected {} fields, got {}", line_no, n_fields, n));

        auto const id = field<std::uint64_t>(fields[0], line_no);
        if (fields[1].size() != 1 || (fields[1][0] != 'A' && fields[1][0] != 'B' && fields[1][0] != 'C'))
            throw IoError(fmt::format("events line {}: bad detector '{}'", line_no, fields[1]));

        PixelHit hit;
        hit.detector = static_cast<DetectorId>(fields[1][0]);
        hit.ix = field<int>(fields[2], line_no);
        hit.iy = field<int>(fields[3], line_no);
        hit.energy_kev = field<double>(fields[4], line_no);
        if (!(hit.energy_kev >= 0))
            throw IoError(fmt::format("events line {}: negative energy", line_no));
        hit.time_ns = field<double>(fields[5], line_no);

        if (events.empty() || events.back().event_id != id)
        {
            if (!events.empty() && id < events.back().event_id)
                throw IoError(fmt::format("events line {}: event ids out of order", line_no));
            EventRecord ev;
            ev.event_id = id;
            if (with_truth)
            {
                ev.truth = TruthBlock{field<double>(fields[6], line_no),
                                      field<double>(fields[7], line_no),
                                      field<double>(fields[8], line_no),
                                      field<double>(fields[9], line_no)};
            }
            events.push_back(std::move(ev));
        }
        if (with_truth)
            hit.truth_order = field<int>(fields[10], line_no) == 1 ? 1 : 2;
        events.back().hits.push_back(hit);
    }
    return events;
}

std::vector<EventRecord> read_events_file(std::string const& path)
{
    auto in = open_in(path);
    return read_events(in);
}

void write_cutflow_file(std::string const& path, CutflowReport const& report)
{
    write_text_file(path, format_cutflow(report));
}

void write_histogram(std::ostream& os, DeltaPhiHistogram const& hist)
{
    os << "bin_low_deg,bin_high_deg,raw,mixed,corrected,corrected_err\n";
    for (int k = 0; k < hist.binning.bins; ++k)
    {
        auto const i = static_cast<std::size_t>(k);
        auto val = [&](std::vector<double> const& v) { return i < v.size() ? v[i] : 0.0; };
        os << fmt::format("{:.4f},{:.4f},{:.0f},{:.6f},{:.6f},{:.6f}\n",
                          hist.binning.low(k),
                          hist.binning.high(k),
                          val(hist.raw),
                          val(hist.mixed) * hist.mixed_scale,
                          val(hist.corrected),
                          val(hist.corrected_err));
    }
}

void write_histogram_file(std::string const& path, DeltaPhiHistogram const& hist)
{
    auto out = open_out(path);
    write_histogram(out, hist);
}

std::string fit_json(FitResult const& fit, std::size_t n_events)
{
    nlohmann::ordered_json j;
    j["M"] = fit.M;
    j["mu"] = fit.mu;
    j["sigma_mu"] = fit.sigma_mu;
    j["chi2"] = fit.chi2;
    j["ndf"] = fit.ndf;
    j["R"] = fit.R;
    j["sigma_R"] = fit.sigma_R;
    j["n_events"] = n_events;
    return j.dump(2) + "\n";
}

void write_text_file(std::string const& path, std::string const& text)
{
    auto out = open_out(path);
    out << text;
    if (!out)
        throw IoError(fmt::format("failed writing '{}'", path));
}

std::string read_text_file(std::string const& path)
{
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace polcorr
