#include "leakdet/stochastics.hpp"

#include <cmath>
#include <stdexcept>

namespace leakdet {

Eigen::MatrixXd build_covariance(const CovarianceSpec& spec) {
    if (!(spec.noise_power > 0.0))
        throw std::invalid_argument("covariance: noise power must be positive");
    if (spec.correlation < 0.0 || spec.correlation >= 1.0)
        throw std::invalid_argument("covariance: correlation must be in [0, 1)");
    if (spec.dim < 1)
        throw std::invalid_argument("covariance: dimension must be >= 1");

    Eigen::MatrixXd c(spec.dim, spec.dim);
    for (int i = 0; i < spec.dim; ++i) {
        c(i, i) = spec.noise_power;
        for (int j = 0; j < i; ++j) {
            const double v =
                spec.noise_power * std::pow(spec.correlation, double(i - j));
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

NoiseModel::NoiseModel(const CovarianceSpec& spec)
    : spec_(spec), covariance_(build_covariance(spec)) {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("covariance: Cholesky factorization failed");
    chol_ = llt.matrixL();
}

Eigen::VectorXcd NoiseModel::sample(rng::Stream& stream) const {
    return sample_circular_gaussian(chol_, stream);
}

Eigen::MatrixXcd NoiseModel::sample_block(int count,
                                          rng::Stream& stream) const {
    return sample_circular_gaussian(chol_, count, stream);
}

Eigen::VectorXcd sample_circular_gaussian(const Eigen::MatrixXd& chol,
                                          rng::Stream& stream) {
    const int n = static_cast<int>(chol.rows());
    Eigen::VectorXcd u(n);
    for (int i = 0; i < n; ++i) u[i] = stream.normal_complex();
    return chol * u;
}

Eigen::MatrixXcd sample_circular_gaussian(const Eigen::MatrixXd& chol,
                                          int count, rng::Stream& stream) {
    const int n = static_cast<int>(chol.rows());
    Eigen::MatrixXcd u(n, count);
    // column-major fill: sample k is fully drawn before sample k+1
    for (int k = 0; k < count; ++k)
        for (int i = 0; i < n; ++i) u(i, k) = stream.normal_complex();
    return chol * u;
}

double snr_to_noise_power(double size, const Eigen::VectorXcd& steering,
                          double snr_linear) {
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("snr_to_noise_power: SNR must be positive");
    const double signal_energy = size * size * steering.squaredNorm();
    if (!(signal_energy > 0.0))
        throw std::invalid_argument(
            "snr_to_noise_power: degenerate (zero) signal");
    return signal_energy / snr_linear;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

Dataset generate_dataset(const Eigen::VectorXcd* signal,
                         const NoiseModel& noise, int secondary_count,
                         bool with_auxiliary, std::uint64_t seed,
                         std::uint64_t phase, std::uint64_t trial) {
    if (secondary_count < 1)
        throw std::invalid_argument("dataset: need at least one secondary snapshot");

    rng::Stream primary_stream(seed, phase, trial, 0);
    rng::Stream secondary_stream(seed, phase, trial, 1);

    Dataset data;
    data.cov = noise.spec();
    data.primary = noise.sample(primary_stream);
    if (signal) data.primary += *signal;
    data.secondary = noise.sample_block(secondary_count, secondary_stream);
    if (with_auxiliary) {
        rng::Stream aux_stream(seed, phase, trial, 2);
        Eigen::VectorXcd aux = noise.sample(aux_stream);
        if (signal) aux += *signal;
        data.auxiliary = std::move(aux);
    }
    return data;
}

Dataset generate_dataset(const std::optional<LeakTruth>& truth,
                         const MeasurementGrid& grid, const PipeSystem& pipe,
                         const CovarianceSpec& cov, int secondary_count,
                         bool with_auxiliary, std::uint64_t seed,
                         std::uint64_t phase, std::uint64_t trial) {
    NoiseModel noise(cov);
    if (truth) {
        Eigen::VectorXcd signal =
            truth->size * steering_vector(truth->location, grid, pipe,
                                          unit_spectrum(grid.frequency_count()));
        Dataset d = generate_dataset(&signal, noise, secondary_count,
                                     with_auxiliary, seed, phase, trial);
        d.truth = *truth;
        return d;
    }
    return generate_dataset(nullptr, noise, secondary_count, with_auxiliary,
                            seed, phase, trial);
}

}  // namespace leakdet
