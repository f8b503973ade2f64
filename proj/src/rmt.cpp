#include "leakdet/rmt.hpp"

#include <cmath>
#include <stdexcept>

#include "leakdet/special_functions.hpp"

namespace leakdet {

RegularizationGrid RegularizationGrid::make(double kappa, double step) {
    if (!(kappa > 0.0) || kappa > 1.0)
        throw std::invalid_argument("rho grid: kappa must be in (0, 1]");
    if (!(step > 0.0))
        throw std::invalid_argument("rho grid: step must be positive");
    RegularizationGrid grid;
    grid.kappa = kappa;
    grid.step = step;
    for (double r = kappa; r < 1.0 - 1e-12; r += step)
        grid.values.push_back(r);
    grid.values.push_back(1.0);  // closed-form endpoint always included
    return grid;
}

Eigen::MatrixXcd rscm(const Eigen::MatrixXcd& scm_mean, double rho) {
    if (!(rho > 0.0) || rho > 1.0)
        throw std::invalid_argument("rscm: rho must be in (0, 1]");
    const double trace = scm_mean.trace().real();
    if (!(trace > 0.0))
        throw std::invalid_argument("rscm: degenerate data (tr R = 0)");
    const int n = static_cast<int>(scm_mean.rows());
    Eigen::MatrixXcd out = (1.0 - rho) * (double(n) / trace) * scm_mean;
    out.diagonal().array() += rho;
    return out;
}

double effective_shrinkage(double rho, double trace, int dim) {
    return rho / (rho + (1.0 - rho) * double(dim) / trace);
}

double fixed_point_m(double rho_bar, const Eigen::VectorXd& cov_eigenvalues,
                     double aspect) {
    if (!(rho_bar > 0.0) || rho_bar > 1.0)
        throw std::invalid_argument("fixed_point_m: rho_bar must be in (0, 1]");
    if (!(aspect > 0.0) || aspect >= 1.0)
        throw std::invalid_argument("fixed_point_m: aspect must be in (0, 1)");

    const double one_minus = 1.0 - rho_bar;
    const auto rhs = [&](double m) {
        const double tr =
            (cov_eigenvalues.array() /
             (1.0 + one_minus * m * cov_eigenvalues.array()))
                .mean();
        return 1.0 / (rho_bar + aspect * one_minus * tr);
    };

    double m = 1.0 / rho_bar;
    for (int it = 0; it < 10000; ++it) {
        const double next = rhs(m);
        if (std::abs(next - m) < 1e-13 * std::max(1.0, std::abs(next)))
            return next;
        m = 0.5 * (m + next);  // damped step
    }
    throw std::runtime_error("fixed_point_m: no convergence in 10^4 iterations");
}

AsymptoticQuantities asymptotic_quantities(double rho,
                                           const Eigen::VectorXcd& steering,
                                           const Eigen::MatrixXd& covariance,
                                           double aspect, double size) {
    if (!(rho > 0.0) || rho > 1.0)
        throw std::invalid_argument(
            "asymptotic_quantities: rho must be in (0, 1]");
    const int n = static_cast<int>(covariance.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("asymptotic_quantities: eigensolver failed");
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double trace = lambda.sum();

    AsymptoticQuantities q;
    q.rho = rho;
    q.aspect = aspect;
    q.rho_bar = effective_shrinkage(rho, trace, n);
    q.m = fixed_point_m(q.rho_bar, lambda, aspect);

    const double one_minus = 1.0 - q.rho_bar;
    const Eigen::VectorXd resolvent_diag =
        (1.0 + one_minus * q.m * lambda.array()).inverse();

    const Eigen::VectorXcd g_proj = eig.eigenvectors().transpose() * steering;
    const Eigen::VectorXd g_power = g_proj.cwiseAbs2();

    const double g_q_g = (g_power.array() * resolvent_diag.array()).sum();
    const double g_cq2_g = (g_power.array() * lambda.array() *
                            resolvent_diag.array().square())
                               .sum();
    const double tr_c2q2 =
        (lambda.array().square() * resolvent_diag.array().square()).mean();

    q.correction = 1.0 - aspect * q.m * q.m * one_minus * one_minus * tr_c2q2;
    if (!(q.correction > 0.0) || q.correction > 1.0 + 1e-12)
        throw std::runtime_error(
            "asymptotic_quantities: correction factor left (0, 1]");

    if (!(g_q_g > 0.0) || !(g_cq2_g > 0.0))
        throw std::invalid_argument("asymptotic_quantities: zero steering");

    q.sigma2 = g_cq2_g / (2.0 * rho * g_q_g * q.correction);
    q.theta = g_q_g * g_q_g * q.correction / g_cq2_g;
    q.beta2 = 2.0 * size * size * q.theta;
    q.resolvent = eig.eigenvectors() * resolvent_diag.asDiagonal() *
                  eig.eigenvectors().transpose();
    return q;
}

namespace {

struct DirectSums {
    double g_inv;      // g^H C(rho)^-1 g
    double g_inv2;     // g^H C(rho)^-2 g
    double trace_inv;  // tr C(rho)^-1
    double trace_scm;  // tr R
};

DirectSums direct_sums(double rho, const Eigen::VectorXcd& g,
                       const Eigen::MatrixXcd& scm_mean) {
    const Eigen::MatrixXcd shrunk = rscm(scm_mean, rho);
    Eigen::LLT<Eigen::MatrixXcd> llt(shrunk);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("rscm estimate: factorization failed");
    const Eigen::VectorXcd half = llt.matrixL().solve(g);  // L^-1 g
    const Eigen::VectorXcd full = llt.solve(g);            // C(rho)^-1 g
    const int n = static_cast<int>(scm_mean.rows());
    const Eigen::MatrixXcd inv =
        llt.solve(Eigen::MatrixXcd::Identity(n, n));
    return DirectSums{half.squaredNorm(), full.squaredNorm(),
                      inv.trace().real(), scm_mean.trace().real()};
}

void require_unit_range(double rho, const char* who) {
    if (!(rho > 0.0) || rho > 1.0)
        throw std::invalid_argument(std::string(who) +
                                    ": rho must be in (0, 1]");
}

// rho < 1 only; callers use the closed forms at rho = 1
double sigma2_hat_from(double rho, double g_inv, double g_inv2,
                       double trace_inv, double trace_scm, double aspect,
                       int dim) {
    const double front = trace_scm / (2.0 * (1.0 - rho) * double(dim));
    const double numer = 1.0 - rho * g_inv2 / g_inv;
    const double denom =
        1.0 - aspect + aspect * rho * trace_inv / double(dim);
    return front * numer / (denom * denom);
}

double theta_hat_from(double rho, double g_inv, double g_inv2,
                      double trace_inv, double trace_scm, double aspect,
                      int dim) {
    const double front = (1.0 - rho) * double(dim) / trace_scm;
    const double denom =
        1.0 - aspect + aspect * rho * trace_inv / double(dim);
    return front * denom * denom * g_inv * g_inv / (g_inv - rho * g_inv2);
}

}  // namespace

double sigma2_hat(double rho, const Eigen::VectorXcd& steering,
                  const Eigen::MatrixXcd& scm_mean, double aspect) {
    require_unit_range(rho, "sigma2_hat");
    const int n = static_cast<int>(scm_mean.rows());
    if (rho == 1.0) {
        const double g_norm2 = steering.squaredNorm();
        const double g_scm_g = steering.dot(scm_mean * steering).real();
        return g_scm_g / (2.0 * g_norm2);
    }
    const DirectSums s = direct_sums(rho, steering, scm_mean);
    return sigma2_hat_from(rho, s.g_inv, s.g_inv2, s.trace_inv, s.trace_scm,
                           aspect, n);
}

double theta_hat(double rho, const Eigen::VectorXcd& steering,
                 const Eigen::MatrixXcd& scm_mean, double aspect) {
    require_unit_range(rho, "theta_hat");
    const int n = static_cast<int>(scm_mean.rows());
    if (rho == 1.0) {
        const double g_norm2 = steering.squaredNorm();
        const double g_scm_g = steering.dot(scm_mean * steering).real();
        return g_norm2 * g_norm2 / g_scm_g;
    }
    const DirectSums s = direct_sums(rho, steering, scm_mean);
    return theta_hat_from(rho, s.g_inv, s.g_inv2, s.trace_inv, s.trace_scm,
                          aspect, n);
}

RscmScan::RscmScan(const Eigen::MatrixXcd& scm_mean, int secondary_count) {
    dim_ = static_cast<int>(scm_mean.rows());
    if (secondary_count < 1)
        throw std::invalid_argument("RscmScan: need K >= 1");
    trace_ = scm_mean.trace().real();
    if (!(trace_ > 0.0))
        throw std::invalid_argument("RscmScan: degenerate data (tr R = 0)");
    aspect_ = double(dim_) / double(secondary_count);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
        (double(dim_) / trace_) * scm_mean);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("RscmScan: eigensolver failed");
    lambda_ = eig.eigenvalues().cwiseMax(0.0);  // clip tiny negatives
    basis_ = eig.eigenvectors();
}

Eigen::VectorXcd RscmScan::project(const Eigen::VectorXcd& v) const {
    return basis_.adjoint() * v;
}

void RscmScan::set_steering(const Eigen::VectorXcd& steering) {
    g_proj_ = project(steering);
    g_power_ = g_proj_.cwiseAbs2();
    g_norm2_ = steering.squaredNorm();
    // g^H R g from the normalized eigenvalues: R = (tr R / N) * V diag(l) V^H
    g_scm_g_ = (g_power_.array() * lambda_.array()).sum() * trace_ / dim_;
    if (!(g_norm2_ > 0.0))
        throw std::invalid_argument("RscmScan: zero steering vector");
}

RscmScan::Sums RscmScan::sums(double rho) const {
    const Eigen::ArrayXd d = (1.0 - rho) * lambda_.array() + rho;
    return Sums{(g_power_.array() / d).sum(),
                (g_power_.array() / d.square()).sum(), (1.0 / d).sum()};
}

double RscmScan::sigma2_hat(double rho) const {
    require_unit_range(rho, "RscmScan::sigma2_hat");
    if (rho == 1.0) return g_scm_g_ / (2.0 * g_norm2_);
    const Sums s = sums(rho);
    return sigma2_hat_from(rho, s.g_inv, s.g_inv2, s.trace_inv, trace_,
                           aspect_, dim_);
}

double RscmScan::theta_hat(double rho) const {
    require_unit_range(rho, "RscmScan::theta_hat");
    if (rho == 1.0) return g_norm2_ * g_norm2_ / g_scm_g_;
    const Sums s = sums(rho);
    return theta_hat_from(rho, s.g_inv, s.g_inv2, s.trace_inv, trace_,
                          aspect_, dim_);
}

double RscmScan::statistic(double rho, const Eigen::VectorXcd& z_projected) const {
    require_unit_range(rho, "RscmScan::statistic");
    const Eigen::ArrayXd d = (1.0 - rho) * lambda_.array() + rho;
    const double raw =
        (g_proj_.conjugate().array() * z_projected.array() / d).sum().real();
    const double den = (g_power_.array() / d).sum();
    return raw * raw / den;
}

double RscmScan::size_estimate(double rho,
                               const Eigen::VectorXcd& z_projected) const {
    require_unit_range(rho, "RscmScan::size_estimate");
    const Eigen::ArrayXd d = (1.0 - rho) * lambda_.array() + rho;
    const double raw =
        (g_proj_.conjugate().array() * z_projected.array() / d).sum().real();
    const double den = (g_power_.array() / d).sum();
    return raw / den;
}

RhoSelection select_rho(const RscmScan& scan, const RegularizationGrid& grid) {
    if (grid.values.empty())
        throw std::invalid_argument("select_rho: empty rho grid");
    RhoSelection best{grid.values.front(),
                      scan.theta_hat(grid.values.front())};
    for (std::size_t i = 1; i < grid.values.size(); ++i) {
        const double theta = scan.theta_hat(grid.values[i]);
        if (theta >= best.theta)  // ties -> larger rho
            best = RhoSelection{grid.values[i], theta};
    }
    return best;
}

PeakEstimate phi_hat_rscm(const Eigen::MatrixXcd& scm_mean,
                          const Eigen::VectorXcd& auxiliary,
                          const SteeringTable& table) {
    return matched_peak(scm_mean, auxiliary, table);
}

DetectionReport ld_rscm_detect(const Dataset& data, double eta,
                               const SteeringTable& table,
                               const RegularizationGrid& rho_grid) {
    if (!data.auxiliary)
        throw std::invalid_argument(
            "ld_rscm_detect: auxiliary snapshot y0 is required");
    if (data.secondary_count() < data.dim())
        throw std::invalid_argument("ld_rscm_detect: needs K >= N");
    if (!(eta > 0.0) || eta > 1.0)
        throw std::invalid_argument("ld_rscm_detect: eta must be in (0, 1]");

    const Eigen::MatrixXcd scm = scm_mean(data.secondary);
    const PeakEstimate peak = phi_hat_rscm(scm, *data.auxiliary, table);

    RscmScan scan(scm, data.secondary_count());
    scan.set_steering(table.vectors.col(peak.index));

    const RhoSelection rho = select_rho(scan, rho_grid);
    const double threshold =
        scan.sigma2_hat(rho.rho) * special::chi2_survival_inv(eta);

    const Eigen::VectorXcd z_proj = scan.project(data.primary);
    const double stat = scan.statistic(rho.rho, z_proj);

    DetectionReport report;
    report.detector = "ld-rscm";
    report.statistic = stat;
    report.threshold = threshold;
    report.leak = stat > threshold;
    report.shrinkage = rho.rho;
    if (report.leak) {
        report.size_estimate = scan.size_estimate(rho.rho, z_proj);
        report.location_estimate = peak.location;
    }
    return report;
}

}  // namespace leakdet
