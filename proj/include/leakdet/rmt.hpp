#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "leakdet/detectors.hpp"
#include "leakdet/hydraulics.hpp"
#include "leakdet/stochastics.hpp"

namespace leakdet {

/// Shrinkage parameter search range [kappa, 1]; always contains 1, where
/// the closed-form limits of the consistent estimators apply.
struct RegularizationGrid {
    double kappa = 0.05;
    double step = 0.01;
    std::vector<double> values;

    static RegularizationGrid make(double kappa = 0.05, double step = 0.01);
};

/// Regularized sample covariance (1 - rho) (N / tr R) R + rho I.
/// Trace equals N for every rho.
Eigen::MatrixXcd rscm(const Eigen::MatrixXcd& scm_mean, double rho);

/// rho normalized by the covariance trace: rho / (rho + (1 - rho) N / tr C).
double effective_shrinkage(double rho, double trace, int dim);

/// Positive solution m of
///   m = ( rho_bar + c (1 - rho_bar) (1/N) tr C (I + (1 - rho_bar) m C)^-1 )^-1
/// by damped fixed-point iteration from m = 1/rho_bar. The covariance enters
/// through its eigenvalues. All internal (1 - .) factors use rho_bar,
/// matching the resolvent Q_N(rho_bar).
double fixed_point_m(double rho_bar, const Eigen::VectorXd& cov_eigenvalues,
                     double aspect);

/// Deterministic large-(N,K) quantities of the shrinkage-weighted matched
/// statistic at (rho, phi): under H0 it behaves as sigma^2 * chi^2_1 and
/// under H1 as sigma^2 * chi'^2_1(beta^2).
struct AsymptoticQuantities {
    double rho = 0.0;
    double rho_bar = 0.0;
    double m = 0.0;           // m_N(-rho_bar)
    double correction = 0.0;  // 1 - c m^2 (1-rho_bar)^2 (1/N) tr C^2 Q^2
    double sigma2 = 0.0;
    double beta2 = 0.0;
    double theta = 0.0;       // beta^2 / (2 s^2)
    double aspect = 0.0;      // c = N/K
    Eigen::MatrixXd resolvent;  // Q_N(rho_bar)
};

AsymptoticQuantities asymptotic_quantities(double rho,
                                           const Eigen::VectorXcd& steering,
                                           const Eigen::MatrixXd& covariance,
                                           double aspect, double size);

/// Consistent estimator of sigma^2(rho, phi) from the secondary data alone
/// (scm_mean = R_N). rho = 1 uses the closed-form limit
/// g^H R g / (2 g^H g).
double sigma2_hat(double rho, const Eigen::VectorXcd& steering,
                  const Eigen::MatrixXcd& scm_mean, double aspect);

/// Consistent estimator of theta(rho, phi); rho = 1 uses
/// (g^H g)^2 / (g^H R g).
double theta_hat(double rho, const Eigen::VectorXcd& steering,
                 const Eigen::MatrixXcd& scm_mean, double aspect);

/// Eigendecomposition-backed evaluation of the shrinkage family: one
/// factorization of the trace-normalized SCM serves every rho on the grid
/// (each quantity is O(N) per rho afterwards).
class RscmScan {
public:
    RscmScan(const Eigen::MatrixXcd& scm_mean, int secondary_count);

    int dim() const { return dim_; }
    double aspect() const { return aspect_; }
    double trace() const { return trace_; }

    Eigen::VectorXcd project(const Eigen::VectorXcd& v) const;
    void set_steering(const Eigen::VectorXcd& steering);

    double sigma2_hat(double rho) const;
    double theta_hat(double rho) const;
    /// Re^2{g^H C(rho)^-1 z0} / (g^H C(rho)^-1 g), z_projected = project(z0)
    double statistic(double rho, const Eigen::VectorXcd& z_projected) const;
    double size_estimate(double rho, const Eigen::VectorXcd& z_projected) const;

private:
    struct Sums {
        double g_inv;      // g^H C(rho)^-1 g
        double g_inv2;     // g^H C(rho)^-2 g
        double trace_inv;  // tr C(rho)^-1
    };
    Sums sums(double rho) const;

    int dim_ = 0;
    double trace_ = 0.0;
    double aspect_ = 0.0;
    Eigen::VectorXd lambda_;   // eigenvalues of (N / tr R) R
    Eigen::MatrixXcd basis_;   // eigenvectors
    Eigen::VectorXcd g_proj_;
    Eigen::VectorXd g_power_;  // |basis^H g|^2
    double g_norm2_ = 0.0;     // g^H g
    double g_scm_g_ = 0.0;     // g^H R g
};

struct RhoSelection {
    double rho = 1.0;
    double theta = 0.0;
};

/// Grid argmax of theta_hat; ties break toward larger rho (more shrinkage).
RhoSelection select_rho(const RscmScan& scan, const RegularizationGrid& grid);

/// Location estimate from the auxiliary snapshot with SCM weighting,
/// argmax Re^2{g^H R^-1 y0} / (g^H R^-1 g).
PeakEstimate phi_hat_rscm(const Eigen::MatrixXcd& scm_mean,
                          const Eigen::VectorXcd& auxiliary,
                          const SteeringTable& table);

/// Full shrinkage-detector pass: location from y0, data-driven rho, analytic
/// threshold sigma2_hat * Q1^-1(eta), statistic, decision, estimates.
DetectionReport ld_rscm_detect(const Dataset& data, double eta,
                               const SteeringTable& table,
                               const RegularizationGrid& rho_grid);

}  // namespace leakdet
