#include "polcorr/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "polcorr/errors.hpp"

namespace polcorr
{
std::string_view to_string(Mode m)
{
    switch (m)
    {
        case Mode::direct: return "direct";
        case Mode::active: return "active";
        case Mode::passive: return "passive";
    }
    return "direct";
}

Mode parse_mode(std::string_view s)
{
    if (s == "direct")
        return Mode::direct;
    if (s == "active")
        return Mode::active;
    if (s == "passive")
        return Mode::passive;
    throw ConfigError(fmt::format("unknown mode '{}' (expected direct, active or passive)", s));
}

void RunConfig::resolve()
{
    if (!(kappa >= 0 && kappa <= 1))
        throw ConfigError(fmt::format("model.kappa {} outside [0, 1]", kappa));
    if (!(theta_scat_deg >= 0 && theta_scat_deg < 180))
        throw ConfigError(fmt::format("model.theta_scat_deg {} outside [0, 180)", theta_scat_deg));
    if (mode == Mode::direct && theta_scat_deg != 0)
        throw ConfigError("model.theta_scat_deg must be 0 in direct mode");
    if (n_pairs == 0)
        throw ConfigError("run.pairs must be positive");
    if (streams == 0)
        throw ConfigError("rng.streams must be positive");
    if (analysis.n_mix < 1)
        throw ConfigError("analysis.mix must be positive");
    if (analysis.binning.bins < 4)
        throw ConfigError("analysis.bins must be at least 4");

    geometry.b.rotation_theta_scat_deg = theta_scat_deg;
    geometry.scatterer.active = (mode == Mode::active);
    selection.mode = mode;
    selection.theta_scat_nominal_deg = theta_scat_deg;
    selection.fwhm_b = geometry.b.energy_resolution_fwhm_at_511;
    selection.fwhm_c = geometry.scatterer.energy_resolution_fwhm_at_511;

    validate(geometry.a);
    validate(geometry.b);
    validate(geometry.scatterer);
    validate(transport);
    validate(selection);
    for (auto w : {analysis.windows.theta1, analysis.windows.theta2})
    {
        if (!(w.lo_deg >= 0 && w.hi_deg <= 180 && w.lo_deg < w.hi_deg))
            throw ConfigError("analysis: theta windows must satisfy 0 <= min < max <= 180");
    }
}

PairModel RunConfig::pair_model() const
{
    PairModel m;
    m.kappa = kappa;
    m.theta_scat_nominal_deg = theta_scat_deg;
    m.mode = mode;
    m.geometry = geometry;
    return m;
}

namespace
{
std::string fmt_double(double v)
{
    return fmt::format("{}", v);
}

template<class T>
T parse_number(std::string_view s, std::string_view key)
{
    T value{};
    auto const* end = s.data() + s.size();
    auto const [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(fmt::format("invalid value '{}' for {}", s, key));
    return value;
}

struct KeySpec
{
    std::string section;
    std::string key;
    std::function<std::string(RunConfig const&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

#define POLCORR_DOUBLE_KEY(SECTION, KEY, MEMBER)                                         \
    KeySpec                                                                              \
    {                                                                                    \
        SECTION, KEY, [](RunConfig const& c) { return fmt_double(c.MEMBER); },           \
            [](RunConfig& c, std::string_view v) {                                       \
                c.MEMBER = parse_number<double>(v, SECTION "." KEY);                     \
            }                                                                            \
    }

#define POLCORR_INT_KEY(SECTION, KEY, MEMBER, TYPE)                                      \
    KeySpec                                                                              \
    {                                                                                    \
        SECTION, KEY, [](RunConfig const& c) { return fmt::format("{}", c.MEMBER); },    \
            [](RunConfig& c, std::string_view v) {                                       \
                c.MEMBER = parse_number<TYPE>(v, SECTION "." KEY);                       \
            }                                                                            \
    }

std::vector<KeySpec> const& key_specs()
{
    static std::vector<KeySpec> const specs = {
        POLCORR_INT_KEY("run", "pairs", n_pairs, std::uint64_t),

        POLCORR_DOUBLE_KEY("model", "kappa", kappa),
        POLCORR_DOUBLE_KEY("model", "theta_scat_deg", theta_scat_deg),
        KeySpec{"model",
                "mode",
                [](RunConfig const& c) { return std::string(to_string(c.mode)); },
                [](RunConfig& c, std::string_view v) { c.mode = parse_mode(v); }},

        POLCORR_INT_KEY("detector", "pixels_per_side", geometry.a.pixels_per_side, int),
        POLCORR_DOUBLE_KEY("detector", "pitch_mm", geometry.a.pitch_mm),
        POLCORR_DOUBLE_KEY("detector", "crystal_side_mm", geometry.a.crystal_side_mm),
        POLCORR_DOUBLE_KEY("detector", "crystal_length_mm", geometry.a.crystal_length_mm),
        POLCORR_DOUBLE_KEY("detector", "distance_a_mm", geometry.a.distance_to_scatterer_mm),
        POLCORR_DOUBLE_KEY("detector", "distance_b_mm", geometry.b.distance_to_scatterer_mm),
        POLCORR_DOUBLE_KEY("detector", "fwhm_a", geometry.a.energy_resolution_fwhm_at_511),
        POLCORR_DOUBLE_KEY("detector", "fwhm_b", geometry.b.energy_resolution_fwhm_at_511),

        POLCORR_DOUBLE_KEY("scatterer", "side_mm", geometry.scatterer.side_mm),
        POLCORR_DOUBLE_KEY("scatterer", "length_mm", geometry.scatterer.length_mm),
        POLCORR_DOUBLE_KEY("scatterer", "fwhm", geometry.scatterer.energy_resolution_fwhm_at_511),
        POLCORR_DOUBLE_KEY("scatterer", "source_distance_mm", geometry.scatterer.source_distance_mm),
        POLCORR_DOUBLE_KEY("scatterer", "threshold_kev", selection.scatterer_threshold_kev),

        POLCORR_DOUBLE_KEY("transport", "lambda511_mm", transport.lambda511_mm),
        POLCORR_DOUBLE_KEY("transport", "lambdaAbs_mm", transport.lambda_abs_mm),

        POLCORR_DOUBLE_KEY("timing", "sigma_ns", transport.sigma_t_ns),

        POLCORR_DOUBLE_KEY("selection", "pixel_threshold_kev", selection.pixel_threshold_kev),
        POLCORR_DOUBLE_KEY("selection", "sum_window_half_width_kev", selection.sum_window_half_width_kev),
        POLCORR_DOUBLE_KEY("selection", "sum_window_sigmas", selection.sum_window_sigmas),
        POLCORR_DOUBLE_KEY("selection", "timing_window_ns", selection.timing_window_ns),
        POLCORR_DOUBLE_KEY("selection", "scatterer_window_sigmas", selection.scatterer_window_sigmas),

        KeySpec{"analysis",
                "bins",
                [](RunConfig const& c) { return fmt::format("{}", c.analysis.binning.bins); },
                [](RunConfig& c, std::string_view v) {
                    c.analysis.binning = DeltaPhiBinning::centered(parse_number<int>(v, "analysis.bins"));
                }},
        POLCORR_INT_KEY("analysis", "mix", analysis.n_mix, int),
        POLCORR_DOUBLE_KEY("analysis", "theta1_min", analysis.windows.theta1.lo_deg),
        POLCORR_DOUBLE_KEY("analysis", "theta1_max", analysis.windows.theta1.hi_deg),
        POLCORR_DOUBLE_KEY("analysis", "theta2_min", analysis.windows.theta2.lo_deg),
        POLCORR_DOUBLE_KEY("analysis", "theta2_max", analysis.windows.theta2.hi_deg),

        POLCORR_INT_KEY("rng", "master_seed", master_seed, std::uint64_t),
        POLCORR_INT_KEY("rng", "streams", streams, unsigned),

        KeySpec{"output",
                "prefix",
                [](RunConfig const& c) { return c.output_prefix; },
                [](RunConfig& c, std::string_view v) { c.output_prefix = std::string(v); }},
    };
    return specs;
}

#undef POLCORR_DOUBLE_KEY
#undef POLCORR_INT_KEY

std::string_view trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}
} // namespace

RunConfig parse_config(std::string_view text)
{
    auto const& specs = key_specs();
    std::map<std::pair<std::string, std::string>, KeySpec const*> lookup;
    std::set<std::string> sections;
    for (auto const& s : specs)
    {
        lookup[{s.section, s.key}] = &s;
        sections.insert(s.section);
    }

    RunConfig cfg;
    std::set<std::string> seen;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto const eol = text.find('\n', pos);
        auto const raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        auto line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';')
            continue;
        try
        {
            if (line.front() == '[')
            {
                if (line.back() != ']')
                    throw ConfigError("malformed section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (!sections.count(section))
                    throw ConfigError(fmt::format("unknown section [{}]", section));
                continue;
            }
            auto const eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("expected 'key = value'");
            if (section.empty())
                throw ConfigError("key outside of a section");
            std::string const key(trim(line.substr(0, eq)));
            auto const value = trim(line.substr(eq + 1));
            auto const it = lookup.find({section, key});
            if (it == lookup.end())
                throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
            std::string const full = section + "." + key;
            if (!seen.insert(full).second)
                throw ConfigError(fmt::format("duplicate key '{}'", full));
            it->second->set(cfg, value);
        }
        catch (ConfigError const& e)
        {
            throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
        }
        catch (DomainError const& e)
        {
            throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
        }
    }

    if (!seen.count("analysis.theta2_min") && !seen.count("analysis.theta2_max"))
        cfg.analysis.windows.theta2 = default_theta_windows(cfg.theta_scat_deg).theta2;
    if (cfg.mode == Mode::passive && !seen.count("detector.distance_b_mm"))
        cfg.geometry.b.distance_to_scatterer_mm = 75.0;

    // Polarimeter B shares the matrix layout of A
    cfg.geometry.b.pixels_per_side = cfg.geometry.a.pixels_per_side;
    cfg.geometry.b.pitch_mm = cfg.geometry.a.pitch_mm;
    cfg.geometry.b.crystal_side_mm = cfg.geometry.a.crystal_side_mm;
    cfg.geometry.b.crystal_length_mm = cfg.geometry.a.crystal_length_mm;

    cfg.resolve();
    return cfg;
}

RunConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(RunConfig const& cfg)
{
    std::string out;
    std::string section;
    for (auto const& s : key_specs())
    {
        if (s.section != section)
        {
            if (!section.empty())
                out += '\n';
            section = s.section;
            out += fmt::format("[{}]\n", section);
        }
        out += fmt::format("{} = {}\n", s.key, s.get(cfg));
    }
    return out;
}

std::string config_hash(RunConfig const& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_config(cfg))
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

} // namespace polcorr
