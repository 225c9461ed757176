#pragma once

#include <array>
#include <vector>

namespace polcorr
{
//---------------------------------------------------------------------------//
/*!
 * Physical constants used by the Compton formulas.
 *
 * The electron rest energy is fixed at exactly 511 keV, so direct
 * annihilation photons have E/mc^2 = 1 and the scattered-energy ratio
 * reduces to 1/(2 - cos(theta)).
 */
struct PhysicsConstants
{
    static constexpr double electron_rest_energy_kev = 511.0;
    //! Classical electron radius [fm]; enters only the overall normalization.
    static constexpr double classical_electron_radius_fm = 2.8179403262;
};

inline constexpr double kElectronMassKeV = PhysicsConstants::electron_rest_energy_kev;

//! F and G kinematic factors of the double-Compton cross section.
struct KinematicFactors
{
    double F;
    double G;
};

//! Scattering angles of a photon pair. Angles in degrees.
struct ScatterAngles
{
    double theta1;
    double theta2;
    double delta_phi;
};

struct TheoryPrediction
{
    double mu;
    double R;
};

struct RatioR
{
    double R;
    double sigma_R;
};

// F(theta), G(theta) for a 511 keV photon
KinematicFactors kinematic_factors(double theta_deg);

// F, G generalised to an incident energy E:
//   F_E = eps^2 (eps + 1/eps - sin^2), G_E = eps^2 sin^2
// These coincide with kinematic_factors() at E = 511 keV.
KinematicFactors kinematic_factors(double energy_kev, double theta_deg);

// Bracket F1 F2 - G1 G2 cos(2 dphi) of the double-Compton cross section
double joint_cross_section_shape(ScatterAngles const& angles);

// Compton-scattered photon energy
double scattered_energy(double energy_kev, double theta_deg);

// Single-photon analyzing power sin^2/(eps + 1/eps - sin^2)
double analyzing_power(double energy_kev, double theta_deg);

// Angle of maximum analyzing power, 0.01 deg tolerance
double optimal_theta(double energy_kev);

// mu = kappa A(E1, theta1) A(E2, theta2)
TheoryPrediction theory_modulation(double e1_kev,
                                   double theta1_deg,
                                   double e2_kev,
                                   double theta2_deg,
                                   double kappa);

// R = (1+mu)/(1-mu) with first-order error propagation
RatioR ratio_R(double mu, double sigma_mu);

// Inverse of ratio_R
double mu_from_R(double R);

//---------------------------------------------------------------------------//
// Gauss-Legendre quadrature
//---------------------------------------------------------------------------//
struct QuadratureRule
{
    std::vector<double> nodes;   //!< on [-1, 1]
    std::vector<double> weights;
};

QuadratureRule gauss_legendre(int order);

//! Composite Gauss-Legendre integration of f over [a, b].
template<class F>
double integrate(F&& f, double a, double b, QuadratureRule const& rule, int panels)
{
    double const h = (b - a) / panels;
    double sum = 0;
    for (int p = 0; p < panels; ++p)
    {
        double const mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        {
            sum += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        }
    }
    return 0.5 * h * sum;
}

//---------------------------------------------------------------------------//
// Finite-window oracle
//---------------------------------------------------------------------------//
struct AngleWindow
{
    double lo_deg;
    double hi_deg;
};

struct AcceptanceOptions
{
    int bins = 24;
    double low_edge_deg = -187.5;  //!< lower edge of the first delta-phi bin
    int order = 16;                //!< Gauss-Legendre points per panel
    int panels = 4;                //!< panels per theta axis
};

/*!
 * Finite-window average of the double-Compton density.
 *
 * The joint density sin1 sin2 (F1 F2 - kappa G1 G2 cos 2dphi) is integrated
 * over the two theta windows with a tensor-product composite Gauss-Legendre
 * rule. \c mu is the ratio of the cos(2 dphi) Fourier coefficient to the
 * constant one; \c density holds the probability of each delta-phi bin
 * (sums to one). \c norm is the integral of sin1 sin2 F1 F2 over the windows
 * (theta in radians), usable to weight sub-windows against each other.
 */
struct AcceptancePrediction
{
    double mu;
    double R;
    double norm;
    std::vector<double> bin_low_deg;
    std::vector<double> bin_high_deg;
    std::vector<double> density;
};

AcceptancePrediction integrate_acceptance(AngleWindow theta1,
                                          AngleWindow theta2,
                                          double e1_kev,
                                          double e2_kev,
                                          double kappa,
                                          AcceptanceOptions const& opts = {});

//! Probability of each bin under density (1 - mu cos 2x)/360 with bin edges in degrees.
std::vector<double> cos2_bin_probabilities(double mu, int bins, double low_edge_deg);

//! Average of cos(2x) over [lo, hi] (degrees).
double bin_average_cos2(double lo_deg, double hi_deg);

} // namespace polcorr
