#include "polcorr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "polcorr/angles.hpp"
#include "polcorr/errors.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
// ThetaSampler
//---------------------------------------------------------------------------//
ThetaSampler::ThetaSampler(double energy_kev, std::size_t table_size) : energy_(energy_kev)
{
    if (!(energy_kev > 0))
        throw DomainError(fmt::format("ThetaSampler: energy {} keV must be positive", energy_kev));
    if (table_size < 2)
        throw DomainError("ThetaSampler: table needs at least two points");

    auto const rule = gauss_legendre(4);
    auto density = [energy_kev](double theta_rad) {
        return kinematic_factors(energy_kev, std::clamp(rad_to_deg(theta_rad), 0.0, 180.0)).F
               * std::sin(theta_rad);
    };

    theta_.resize(table_size);
    cdf_.resize(table_size);
    double const step = 180.0 / static_cast<double>(table_size - 1);
    theta_[0] = 0;
    cdf_[0] = 0;
    for (std::size_t i = 1; i < table_size; ++i)
    {
        theta_[i] = (i + 1 == table_size) ? 180.0 : step * static_cast<double>(i);
        cdf_[i] = cdf_[i - 1]
                  + integrate(density, deg_to_rad(theta_[i - 1]), deg_to_rad(theta_[i]), rule, 1);
    }
    double const total = cdf_.back();
    for (auto& c : cdf_)
        c /= total;
    cdf_.back() = 1.0;
}

double ThetaSampler::cdf(double theta_deg) const
{
    if (theta_deg <= 0)
        return 0;
    if (theta_deg >= 180)
        return 1;
    auto const it = std::upper_bound(theta_.begin(), theta_.end(), theta_deg);
    auto const i = static_cast<std::size_t>(it - theta_.begin());
    double const f = (theta_deg - theta_[i - 1]) / (theta_[i] - theta_[i - 1]);
    return cdf_[i - 1] + f * (cdf_[i] - cdf_[i - 1]);
}

double ThetaSampler::quantile(double u) const
{
    if (u <= 0)
        return 0;
    if (u >= 1)
        return 180.0;
    auto const it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto const i = static_cast<std::size_t>(it - cdf_.begin());
    double const f = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
    return theta_[i - 1] + f * (theta_[i] - theta_[i - 1]);
}

double ThetaSampler::sample(RandomStream& rng, AngleWindow window) const
{
    double const lo = cdf(window.lo_deg);
    double const hi = cdf(window.hi_deg);
    double const theta = quantile(lo + rng.uniform() * (hi - lo));
    return std::clamp(theta, window.lo_deg, window.hi_deg);
}

//---------------------------------------------------------------------------//
// ThetaSamplerBank
//---------------------------------------------------------------------------//
ThetaSamplerBank::ThetaSamplerBank(double e_min_kev, double e_max_kev, double step_kev)
    : e_min_(e_min_kev), step_(step_kev)
{
    if (!(e_min_kev > 0) || !(e_max_kev >= e_min_kev) || !(step_kev > 0))
        throw DomainError("ThetaSamplerBank: invalid energy range");
    auto const n = static_cast<std::size_t>(std::ceil((e_max_kev - e_min_kev) / step_kev)) + 1;
    tables_.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        tables_.emplace_back(e_min_kev + step_kev * static_cast<double>(i));
}

double ThetaSamplerBank::sample(double energy_kev, RandomStream& rng) const
{
    return sample(energy_kev, rng, std::nullopt);
}

double ThetaSamplerBank::sample(double energy_kev,
                                RandomStream& rng,
                                std::optional<AngleWindow> window) const
{
    double const pos = std::clamp(
        (energy_kev - e_min_) / step_, 0.0, static_cast<double>(tables_.size() - 1));
    auto const i = std::min(static_cast<std::size_t>(pos), tables_.size() - 1);
    double const w = pos - static_cast<double>(i);
    double const u = rng.uniform();

    auto draw = [&](ThetaSampler const& t) {
        if (!window)
            return t.quantile(u);
        double const lo = t.cdf(window->lo_deg);
        double const hi = t.cdf(window->hi_deg);
        return std::clamp(t.quantile(lo + u * (hi - lo)), window->lo_deg, window->hi_deg);
    };

    double const t0 = draw(tables_[i]);
    if (w == 0 || i + 1 == tables_.size())
        return t0;
    return (1.0 - w) * t0 + w * draw(tables_[i + 1]);
}

//---------------------------------------------------------------------------//
// Delta phi
//---------------------------------------------------------------------------//
double delta_phi_quantile(double mu, double u)
{
    if (!(mu >= 0 && mu < 1))
        throw DomainError(fmt::format("sample_delta_phi: amplitude {} outside [0, 1)", mu));
    constexpr double pi = std::numbers::pi;

    // Solve x + pi - (mu/2) sin 2x = 2 pi u on [-pi, pi]
    double const target = 2.0 * pi * u;
    auto g = [&](double x) { return x + pi - 0.5 * mu * std::sin(2.0 * x) - target; };

    double lo = -pi;
    double hi = pi;
    double x = target - pi;
    x += 0.5 * mu * std::sin(2.0 * x);  // first-order inverse
    x = std::clamp(x, -pi, pi);
    for (int iter = 0; iter < 20; ++iter)
    {
        double const gx = g(x);
        if (gx < 0)
            lo = x;
        else
            hi = x;
        double const slope = 1.0 - mu * std::cos(2.0 * x);
        double next = x - gx / slope;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        double const dx = next - x;
        x = next;
        if (std::abs(dx) < 1e-10)
            break;
    }
    return wrap_degrees(rad_to_deg(x));
}

double sample_delta_phi(double mu_amplitude, RandomStream& rng)
{
    return delta_phi_quantile(mu_amplitude, rng.uniform());
}

//---------------------------------------------------------------------------//
// PairSampler
//---------------------------------------------------------------------------//
namespace
{
// Margin on theta_scat beyond the cone for vertex and incidence offsets
constexpr double kThetaScatMargin = 30.0;

PairModel prepared(PairModel model)
{
    if (!(model.kappa >= 0 && model.kappa <= 1))
        throw ConfigError(fmt::format("model: kappa {} outside [0, 1]", model.kappa));
    if (!(model.theta_scat_nominal_deg >= 0 && model.theta_scat_nominal_deg < 180))
        throw ConfigError(
            fmt::format("model: theta_scat {} outside [0, 180)", model.theta_scat_nominal_deg));
    model.geometry.b.rotation_theta_scat_deg = model.theta_scat_nominal_deg;
    model.geometry.scatterer.active = (model.mode == Mode::active);
    validate(model.geometry.a);
    validate(model.geometry.b);
    validate(model.geometry.scatterer);
    return model;
}
} // namespace

PairSampler::PairSampler(PairModel model)
    : model_(prepared(std::move(model)))
    , place_a_(placement_a(model_.geometry))
    , place_b_(placement_b(model_.geometry))
    , theta1_sampler_(kElectronMassKeV)
{
    cone_half_angle_ = angular_coverage(model_.geometry.b);
    if (!(cone_half_angle_ > 0))
        throw ConfigError("model: detector B has an empty acceptance cone");

    if (!model_.has_prior_scatter())
    {
        theta2_fixed_.emplace(kElectronMassKeV);
        return;
    }

    double const nominal = model_.theta_scat_nominal_deg;
    double const t_lo = std::max(0.0, nominal - cone_half_angle_ - kThetaScatMargin);
    double const t_hi = std::min(180.0, nominal + cone_half_angle_ + kThetaScatMargin);
    for (double t = t_lo; t <= t_hi; t += 0.05)
        kn_max_ = std::max(kn_max_, kinematic_factors(t).F);
    kn_max_ *= 1.001;

    theta2_bank_.emplace(std::floor(scattered_energy(kElectronMassKeV, t_hi)),
                         std::ceil(scattered_energy(kElectronMassKeV, t_lo)));
}

void PairSampler::sample_prior_scatter(PairTruth& pair, RandomStream& rng) const
{
    auto const& scat = model_.geometry.scatterer;
    double const hw_a = model_.geometry.a.half_width_mm();
    Vec3 const center = model_.geometry.scatterer_center();

    // Vertex inside C whose back-to-back partner reaches A's matrix
    Vec3 vertex;
    Vec3 dir_in;
    for (int attempt = 0;; ++attempt)
    {
        if (attempt == 100000)
            throw ConfigError("model: no scatterer vertex is back-to-back with detector A");
        vertex = center
                 + Vec3{rng.uniform(-0.5, 0.5) * scat.side_mm,
                        rng.uniform(-0.5, 0.5) * scat.length_mm,
                        rng.uniform(-0.5, 0.5) * scat.side_mm};
        dir_in = normalized(vertex);
        auto const t = distance_to_face(Vec3{}, -dir_in, place_a_);
        if (!t)
            continue;
        Vec3 const local = to_local((*t) * (-dir_in), place_a_);
        if (std::abs(local.x) < hw_a && std::abs(local.y) < hw_a)
            break;
    }

    // Outgoing direction uniform in solid angle inside B's cone, KN-weighted
    Vec3 const axis = normalized(place_b_.face_center - vertex);
    auto const frame = transverse_frame(axis, place_b_.u, place_b_.v);
    double const cos_min = std::cos(deg_to_rad(cone_half_angle_));
    Vec3 dir_out;
    double theta_scat = 0;
    for (;;)
    {
        double const cos_alpha = 1.0 - rng.uniform() * (1.0 - cos_min);
        double const alpha = rad_to_deg(std::acos(cos_alpha));
        double const beta = rng.uniform(-180.0, 180.0);
        dir_out = rotate_direction(axis, frame, alpha, beta);
        theta_scat = angle_between_deg(dir_in, dir_out);
        if (rng.uniform() * kn_max_ < kinematic_factors(theta_scat).F)
            break;
    }

    pair.prior_scatter = true;
    pair.theta_scat_true_deg = theta_scat;
    pair.e2_after_scatter_kev = scattered_energy(kElectronMassKeV, theta_scat);
    pair.dir1 = -dir_in;
    pair.origin2 = vertex;
    pair.dir2 = dir_out;
}

PairTruth PairSampler::operator()(RandomStream& rng) const
{
    PairTruth pair;
    pair.kappa_used = model_.kappa;

    if (model_.has_prior_scatter())
    {
        sample_prior_scatter(pair, rng);
    }
    else
    {
        double const hw = model_.geometry.a.half_width_mm();
        Vec3 const target = place_a_.face_center + rng.uniform(-hw, hw) * place_a_.u
                            + rng.uniform(-hw, hw) * place_a_.v;
        pair.dir1 = normalized(target);
        pair.origin2 = Vec3{};
        pair.dir2 = -pair.dir1;
    }

    pair.theta1_deg = model_.theta1_window ? theta1_sampler_.sample(rng, *model_.theta1_window)
                                           : theta1_sampler_.sample(rng);
    if (theta2_fixed_)
    {
        pair.theta2_deg = model_.theta2_window
                              ? theta2_fixed_->sample(rng, *model_.theta2_window)
                              : theta2_fixed_->sample(rng);
    }
    else
    {
        pair.theta2_deg
            = theta2_bank_->sample(pair.e2_after_scatter_kev, rng, model_.theta2_window);
    }

    pair.mu_amplitude = model_.kappa * analyzing_power(pair.e1_kev, pair.theta1_deg)
                        * analyzing_power(pair.e2_after_scatter_kev, pair.theta2_deg);
    pair.phi1_deg = rng.uniform(-180.0, 180.0);
    double const dphi = sample_delta_phi(pair.mu_amplitude, rng);
    pair.phi2_deg = wrap_degrees(pair.phi1_deg - dphi);
    return pair;
}

PairTruth sample_pair(PairModel const& model, RandomStream& rng)
{
    return PairSampler(model)(rng);
}

} // namespace polcorr
