#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "leakdet/hydraulics.hpp"
#include "leakdet/rng.hpp"

namespace leakdet {

/// Structured noise covariance [C]_ij = nu^2 r^|i-j|.
struct CovarianceSpec {
    double noise_power;   // nu^2, head^2 units
    double correlation;   // r in [0, 1)
    int dim;              // N
};

/// Toeplitz covariance as specified; real symmetric, positive definite.
Eigen::MatrixXd build_covariance(const CovarianceSpec& spec);

/// Cholesky-backed sampler of CN(0, C) vectors.
class NoiseModel {
public:
    explicit NoiseModel(const CovarianceSpec& spec);

    const CovarianceSpec& spec() const { return spec_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    const Eigen::MatrixXd& chol() const { return chol_; }

    Eigen::VectorXcd sample(rng::Stream& stream) const;
    Eigen::MatrixXcd sample_block(int count, rng::Stream& stream) const;

private:
    CovarianceSpec spec_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd chol_;  // lower factor
};

/// Samples of CN(0, L L^T) given a lower Cholesky factor.
Eigen::VectorXcd sample_circular_gaussian(const Eigen::MatrixXd& chol,
                                          rng::Stream& stream);
Eigen::MatrixXcd sample_circular_gaussian(const Eigen::MatrixXd& chol,
                                          int count, rng::Stream& stream);

/// nu^2 = ||size * steering||^2 / snr_linear. The SNR sweeps hold the
/// physical leak fixed and scale the noise floor.
double snr_to_noise_power(double size, const Eigen::VectorXcd& steering,
                          double snr_linear);

double db_to_linear(double db);

struct LeakTruth {
    double size;      // s [m^2]
    double location;  // phi [m]
};

/// Everything a detector consumes: the snapshot under test, the leak-free
/// secondary block, and (optionally) the auxiliary snapshot y0 used by
/// location estimation in the RSCM detector.
struct Dataset {
    Eigen::VectorXcd primary;                  // z0
    Eigen::MatrixXcd secondary;                // N x K
    std::optional<Eigen::VectorXcd> auxiliary; // y0
    std::optional<LeakTruth> truth;            // present iff H1
    CovarianceSpec cov;

    int dim() const { return static_cast<int>(primary.size()); }
    int secondary_count() const { return static_cast<int>(secondary.cols()); }
};

/// Generates one trial's data. Sub-streams are derived from
/// (seed, phase, trial) with the lane convention of rng::Stream, so the
/// primary, secondary, and auxiliary draws are disjoint by construction and
/// a dataset with the auxiliary snapshot enabled has bit-identical
/// z0 / secondary to one without it.
///
/// Under H1 both z0 and y0 carry the leak signal (the auxiliary snapshot is
/// an additional primary-type measurement).
Dataset generate_dataset(const Eigen::VectorXcd* signal,
                         const NoiseModel& noise, int secondary_count,
                         bool with_auxiliary, std::uint64_t seed,
                         std::uint64_t phase, std::uint64_t trial);

/// Convenience form matching the model definition: computes the signal
/// s * g(phi) from the hydraulic model (flat unit upstream spectrum).
Dataset generate_dataset(const std::optional<LeakTruth>& truth,
                         const MeasurementGrid& grid, const PipeSystem& pipe,
                         const CovarianceSpec& cov, int secondary_count,
                         bool with_auxiliary, std::uint64_t seed,
                         std::uint64_t phase, std::uint64_t trial);

}  // namespace leakdet
