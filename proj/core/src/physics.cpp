#include "polcorr/physics.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "polcorr/angles.hpp"
#include "polcorr/errors.hpp"

namespace polcorr
{
namespace
{
void require_theta(double theta_deg, char const* what)
{
    if (!(theta_deg >= 0.0 && theta_deg <= 180.0))
    {
        throw DomainError(
            fmt::format("{}: angle {} deg outside [0, 180]", what, theta_deg));
    }
}

void require_energy(double energy_kev, char const* what)
{
    if (!(energy_kev > 0.0) || !std::isfinite(energy_kev))
    {
        throw DomainError(fmt::format("{}: energy {} keV must be positive", what, energy_kev));
    }
}

void require_kappa(double kappa)
{
    if (!(kappa >= 0.0 && kappa <= 1.0))
    {
        throw DomainError(fmt::format("kappa {} outside [0, 1]", kappa));
    }
}

// Ratio of scattered to incident photon energy
double energy_ratio(double energy_kev, double cos_theta)
{
    return 1.0 / (1.0 + (energy_kev / kElectronMassKeV) * (1.0 - cos_theta));
}

} // namespace

KinematicFactors kinematic_factors(double theta_deg)
{
    require_theta(theta_deg, "kinematic_factors");
    double const c = std::cos(deg_to_rad(theta_deg));
    double const s = std::sin(deg_to_rad(theta_deg));
    double const one_minus = 1.0 - c;
    double const denom = 2.0 - c;
    return {(2.0 + one_minus * one_minus * one_minus) / (denom * denom * denom),
            s * s / (denom * denom)};
}

KinematicFactors kinematic_factors(double energy_kev, double theta_deg)
{
    require_energy(energy_kev, "kinematic_factors");
    require_theta(theta_deg, "kinematic_factors");
    double const c = std::cos(deg_to_rad(theta_deg));
    double const s = std::sin(deg_to_rad(theta_deg));
    double const eps = energy_ratio(energy_kev, c);
    double const eps2 = eps * eps;
    return {eps2 * (eps + 1.0 / eps - s * s), eps2 * s * s};
}

double joint_cross_section_shape(ScatterAngles const& angles)
{
    if (!(angles.delta_phi >= -180.0 && angles.delta_phi < 180.0))
    {
        throw DomainError(
            fmt::format("delta_phi {} deg outside [-180, 180)", angles.delta_phi));
    }
    auto const k1 = kinematic_factors(angles.theta1);
    auto const k2 = kinematic_factors(angles.theta2);
    return k1.F * k2.F - k1.G * k2.G * std::cos(2.0 * deg_to_rad(angles.delta_phi));
}

double scattered_energy(double energy_kev, double theta_deg)
{
    require_energy(energy_kev, "scattered_energy");
    return energy_kev * energy_ratio(energy_kev, std::cos(deg_to_rad(theta_deg)));
}

double analyzing_power(double energy_kev, double theta_deg)
{
    require_energy(energy_kev, "analyzing_power");
    require_theta(theta_deg, "analyzing_power");
    double const c = std::cos(deg_to_rad(theta_deg));
    double const s = std::sin(deg_to_rad(theta_deg));
    double const eps = energy_ratio(energy_kev, c);
    double const s2 = s * s;
    return s2 / (eps + 1.0 / eps - s2);
}

double optimal_theta(double energy_kev)
{
    require_energy(energy_kev, "optimal_theta");
    // A(theta) vanishes at both ends and has a single interior maximum
    auto neg_a = [energy_kev](double theta) { return -analyzing_power(energy_kev, theta); };
    int const bits = std::numeric_limits<double>::digits / 2;
    std::uintmax_t max_iter = 200;
    auto const [theta, value]
        = boost::math::tools::brent_find_minima(neg_a, 1.0, 179.0, bits, max_iter);
    (void)value;
    return theta;
}

TheoryPrediction theory_modulation(
    double e1_kev, double theta1_deg, double e2_kev, double theta2_deg, double kappa)
{
    require_kappa(kappa);
    double const mu
        = kappa * analyzing_power(e1_kev, theta1_deg) * analyzing_power(e2_kev, theta2_deg);
    return {mu, (1.0 + mu) / (1.0 - mu)};
}

RatioR ratio_R(double mu, double sigma_mu)
{
    if (!(mu > -1.0 && mu < 1.0))
    {
        throw DomainError(fmt::format("ratio_R: mu {} outside (-1, 1)", mu));
    }
    double const one_minus = 1.0 - mu;
    return {(1.0 + mu) / one_minus, 2.0 * sigma_mu / (one_minus * one_minus)};
}

double mu_from_R(double R)
{
    if (!(R > 0.0))
    {
        throw DomainError(fmt::format("mu_from_R: R {} must be positive", R));
    }
    return (R - 1.0) / (R + 1.0);
}

//---------------------------------------------------------------------------//
QuadratureRule gauss_legendre(int order)
{
    if (order < 1)
    {
        throw DomainError("gauss_legendre: order must be >= 1");
    }
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    int const n = order;
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                double const p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double const pn = (n == 1) ? x : p1;
            double const pnm1 = (n == 1) ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            double const dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        double const w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

//---------------------------------------------------------------------------//
double bin_average_cos2(double lo_deg, double hi_deg)
{
    double const lo = deg_to_rad(lo_deg);
    double const hi = deg_to_rad(hi_deg);
    if (hi == lo)
        return std::cos(2.0 * lo);
    return (std::sin(2.0 * hi) - std::sin(2.0 * lo)) / (2.0 * (hi - lo));
}

std::vector<double> cos2_bin_probabilities(double mu, int bins, double low_edge_deg)
{
    std::vector<double> prob(bins);
    double const width = 360.0 / bins;
    for (int k = 0; k < bins; ++k)
    {
        double const lo = low_edge_deg + k * width;
        double const hi = lo + width;
        prob[k] = (width / 360.0) * (1.0 - mu * bin_average_cos2(lo, hi));
    }
    return prob;
}

namespace
{
struct AxisNodes
{
    std::vector<double> theta_deg;
    std::vector<double> weight;  //!< includes the sin(theta) Jacobian
};

AxisNodes axis_nodes(AngleWindow w, QuadratureRule const& rule, int panels)
{
    AxisNodes out;
    if (w.hi_deg == w.lo_deg)
    {
        // Degenerate window: the window average is the point value
        out.theta_deg.push_back(w.lo_deg);
        out.weight.push_back(std::sin(deg_to_rad(w.lo_deg)));
        return out;
    }
    double const a = deg_to_rad(w.lo_deg);
    double const b = deg_to_rad(w.hi_deg);
    double const h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
    {
        double const mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        {
            double const t = mid + 0.5 * h * rule.nodes[i];
            out.theta_deg.push_back(rad_to_deg(t));
            out.weight.push_back(0.5 * h * rule.weights[i] * std::sin(t));
        }
    }
    return out;
}

void require_window(AngleWindow w, char const* name)
{
    if (!(w.lo_deg >= 0.0 && w.hi_deg <= 180.0) || !(w.hi_deg >= w.lo_deg))
    {
        throw DomainError(fmt::format(
            "integrate_acceptance: {} window [{}, {}] is empty or outside [0, 180]",
            name,
            w.lo_deg,
            w.hi_deg));
    }
}
} // namespace

AcceptancePrediction integrate_acceptance(AngleWindow theta1,
                                          AngleWindow theta2,
                                          double e1_kev,
                                          double e2_kev,
                                          double kappa,
                                          AcceptanceOptions const& opts)
{
    require_window(theta1, "theta1");
    require_window(theta2, "theta2");
    require_energy(e1_kev, "integrate_acceptance");
    require_energy(e2_kev, "integrate_acceptance");
    require_kappa(kappa);
    if (opts.bins < 1 || opts.order < 1 || opts.panels < 1)
    {
        throw DomainError("integrate_acceptance: bins, order and panels must be positive");
    }

    auto const rule = gauss_legendre(opts.order);
    auto const ax1 = axis_nodes(theta1, rule, opts.panels);
    auto const ax2 = axis_nodes(theta2, rule, opts.panels);

    std::vector<KinematicFactors> k2(ax2.theta_deg.size());
    for (std::size_t j = 0; j < k2.size(); ++j)
        k2[j] = kinematic_factors(e2_kev, ax2.theta_deg[j]);

    double constant = 0;
    double modulated = 0;
    for (std::size_t i = 0; i < ax1.theta_deg.size(); ++i)
    {
        auto const k1 = kinematic_factors(e1_kev, ax1.theta_deg[i]);
        for (std::size_t j = 0; j < k2.size(); ++j)
        {
            double const w = ax1.weight[i] * ax2.weight[j];
            constant += w * k1.F * k2[j].F;
            modulated += w * k1.G * k2[j].G;
        }
    }

    AcceptancePrediction out;
    out.norm = constant;
    out.mu = constant > 0 ? kappa * modulated / constant : 0.0;
    out.R = (1.0 + out.mu) / (1.0 - out.mu);
    out.density = cos2_bin_probabilities(out.mu, opts.bins, opts.low_edge_deg);
    double const width = 360.0 / opts.bins;
    for (int k = 0; k < opts.bins; ++k)
    {
        out.bin_low_deg.push_back(opts.low_edge_deg + k * width);
        out.bin_high_deg.push_back(opts.low_edge_deg + (k + 1) * width);
    }
    return out;
}

} // namespace polcorr
