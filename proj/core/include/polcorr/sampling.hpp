#pragma once

#include <optional>
#include <vector>

#include "polcorr/geometry.hpp"
#include "polcorr/physics.hpp"
#include "polcorr/random.hpp"

namespace polcorr
{
//---------------------------------------------------------------------------//
/*!
 * Tabulated inverse CDF of the azimuth-averaged Compton angular density.
 *
 * The density is F_E(theta) sin(theta) on [0, 180] deg. The CDF is
 * integrated per table interval with 4-point Gauss-Legendre and inverted by
 * linear interpolation.
 */
class ThetaSampler
{
  public:
    static constexpr std::size_t default_table_size = 2048;

    explicit ThetaSampler(double energy_kev, std::size_t table_size = default_table_size);

    double energy() const { return energy_; }
    std::size_t size() const { return theta_.size(); }

    // Tabulated CDF at theta (linear interpolation)
    double cdf(double theta_deg) const;

    // Inverse CDF
    double quantile(double u) const;

    double sample(RandomStream& rng) const { return quantile(rng.uniform()); }

    // Sample truncated to [lo, hi]
    double sample(RandomStream& rng, AngleWindow window) const;

  private:
    double energy_;
    std::vector<double> theta_;
    std::vector<double> cdf_;
};

//! Draw theta from the marginal at the sampler's energy.
inline double sample_theta_marginal(ThetaSampler const& sampler, RandomStream& rng)
{
    return sampler.sample(rng);
}

//---------------------------------------------------------------------------//
/*!
 * Family of ThetaSampler tables on a uniform energy grid.
 *
 * Used where the photon energy varies continuously (after a prior scatter
 * inside the acceptance cone). A draw shares one uniform between the two
 * bracketing tables and blends the quantiles linearly in energy.
 */
class ThetaSamplerBank
{
  public:
    ThetaSamplerBank(double e_min_kev, double e_max_kev, double step_kev = 1.0);

    double sample(double energy_kev, RandomStream& rng) const;
    double sample(double energy_kev, RandomStream& rng, std::optional<AngleWindow> window) const;

  private:
    double e_min_;
    double step_;
    std::vector<ThetaSampler> tables_;
};

//---------------------------------------------------------------------------//
// Delta-phi from density proportional to 1 - mu cos(2 dphi), in [-180, 180)
double sample_delta_phi(double mu_amplitude, RandomStream& rng);

// Invert the analytic CDF at u; exposed for testing
double delta_phi_quantile(double mu_amplitude, double u);

//---------------------------------------------------------------------------//
//! Correlation model and setup for pair generation.
struct PairModel
{
    double kappa = 1.0;
    double theta_scat_nominal_deg = 0.0;
    Mode mode = Mode::direct;
    SetupGeometry geometry;
    //! Optional truncation of the polarimeter angles (oracle comparisons).
    std::optional<AngleWindow> theta1_window;
    std::optional<AngleWindow> theta2_window;

    bool has_prior_scatter() const
    {
        return mode != Mode::direct && theta_scat_nominal_deg > 0;
    }
};

//! Ground-truth kinematics of one annihilation pair.
struct PairTruth
{
    double e1_kev = kElectronMassKeV;
    double e2_after_scatter_kev = kElectronMassKeV;
    double theta_scat_true_deg = 0;
    double theta1_deg = 0;
    double theta2_deg = 0;
    double phi1_deg = 0;
    double phi2_deg = 0;
    double kappa_used = 1;
    double mu_amplitude = 0;  //!< kappa A(E1, theta1) A(E2, theta2)
    double weight = 1;
    bool prior_scatter = false;

    Vec3 dir1;    //!< flight direction of gamma1 (towards A)
    Vec3 origin2; //!< where gamma2 starts its flight towards B
    Vec3 dir2;    //!< flight direction of gamma2 towards B

    double scatterer_deposit_kev() const { return kElectronMassKeV - e2_after_scatter_kev; }
};

/*!
 * Pair generator.
 *
 * Gamma1 is aimed uniformly over detector A's face. Without a prior scatter
 * gamma2 flies back-to-back. With one, the vertex is drawn in the scatterer
 * crystal (restricted to vertices whose partner reaches A) and the outgoing
 * direction is drawn uniformly in solid angle inside B's acceptance cone,
 * then accepted with the unpolarized Klein-Nishina weight.
 *
 * Polarimeter angles theta1/theta2 come from their marginals; the azimuth
 * difference from the conditional density with amplitude
 * kappa A(E1, theta1) A(E2, theta2).
 */
class PairSampler
{
  public:
    explicit PairSampler(PairModel model);

    PairTruth operator()(RandomStream& rng) const;

    PairModel const& model() const { return model_; }
    double cone_half_angle_deg() const { return cone_half_angle_; }

  private:
    PairModel model_;
    Placement place_a_;
    Placement place_b_;
    ThetaSampler theta1_sampler_;
    std::optional<ThetaSampler> theta2_fixed_;
    std::optional<ThetaSamplerBank> theta2_bank_;
    double cone_half_angle_ = 0;
    double kn_max_ = 0;

    void sample_prior_scatter(PairTruth& pair, RandomStream& rng) const;
};

//! Convenience wrapper; builds the tables on every call.
PairTruth sample_pair(PairModel const& model, RandomStream& rng);

} // namespace polcorr
