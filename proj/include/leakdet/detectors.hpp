#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leakdet/hydraulics.hpp"
#include "leakdet/stochastics.hpp"

namespace leakdet {

struct DetectionReport {
    std::string detector;
    bool leak = false;  // decision: leak iff statistic > threshold
    double statistic = 0.0;
    double threshold = 0.0;
    std::optional<double> size_estimate;      // present iff leak decided
    std::optional<double> location_estimate;  // present iff leak decided
    std::optional<double> shrinkage;          // selected rho (LD-RSCM only)
};

/// S_N = sum_k z_k z_k^H over the secondary snapshots.
Eigen::MatrixXcd scm_sum(const Eigen::MatrixXcd& secondary);
/// R_N = S_N / K.
Eigen::MatrixXcd scm_mean(const Eigen::MatrixXcd& secondary);

struct PeakEstimate {
    int index = -1;
    double location = 0.0;
    double value = 0.0;        // Re^2{g^H A^-1 z} / (g^H A^-1 g) at the peak
    double numerator = 0.0;    // Re{g^H A^-1 z} at the peak
    double denominator = 0.0;  // g^H A^-1 g at the peak
};

/// Grid argmax of Re^2{g(phi)^H A^-1 z} / (g(phi)^H A^-1 g(phi)).
/// Ties break toward the smallest location. Columns with vanishing
/// whitened norm are skipped; if every column vanishes the grid is
/// degenerate and an exception is thrown.
PeakEstimate matched_peak(const Eigen::LLT<Eigen::MatrixXcd>& weight,
                          const Eigen::VectorXcd& z,
                          const SteeringTable& table);
PeakEstimate matched_peak(const Eigen::MatrixXcd& weight,
                          const Eigen::VectorXcd& z,
                          const SteeringTable& table);

/// Kelly-style GLRT statistic
///   Delta = Re^2{g^H S^-1 z0} / ((1 + z0^H S^-1 z0) g^H S^-1 g),
/// in [0, 1).
double ld_scm_statistic(const Eigen::VectorXcd& z0,
                        const Eigen::MatrixXcd& scm_sum,
                        const Eigen::VectorXcd& steering);

struct LdScmEval {
    double statistic;  // Delta at the location argmax
    PeakEstimate peak;
};

/// Full LD-SCM evaluation: location grid search on z0 with A = S_N, then
/// the normalized statistic.
LdScmEval ld_scm_evaluate(const Eigen::VectorXcd& z0,
                          const Eigen::MatrixXcd& scm_sum,
                          const SteeringTable& table);

/// Monte-Carlo threshold for LD-SCM under the canonical null
/// (CN(0, I) primary and secondary data). The grid maximization is part of
/// the simulated statistic: calibrating the fixed-steering statistic alone
/// underestimates the operating false-alarm rate of the full procedure.
/// Requires trials >= 50 / pfa.
double ld_scm_calibrate(const SteeringTable& table, int secondary_count,
                        double pfa, long trials, std::uint64_t seed,
                        int threads = 1);

/// Monte-Carlo threshold for RD-SCM (z0^H S^-1 z0) under the canonical null.
double rd_scm_calibrate(int dim, int secondary_count, double pfa, long trials,
                        std::uint64_t seed, int threads = 1);

DetectionReport ld_scm_detect(const Dataset& data, const SteeringTable& table,
                              double threshold);
DetectionReport rd_scm_detect(const Dataset& data, double threshold);

/// Likelihood-ratio benchmark with s, phi, C known. The null law of the
/// statistic Re{s g^H C^-1 z0} is Normal(0, s^2 g^H C^-1 g / 2), so the
/// threshold is analytic.
class OracleDetector {
public:
    static OracleDetector make(double size, double location,
                               const Eigen::VectorXcd& steering,
                               const Eigen::MatrixXd& covariance, double pfa);

    double statistic(const Eigen::VectorXcd& z0) const;
    DetectionReport detect(const Eigen::VectorXcd& z0) const;

    double threshold() const { return threshold_; }
    double null_sigma() const { return null_sigma_; }
    /// s^2 g^H C^-1 g: the mean shift of the statistic under H1.
    double mean_shift() const { return mean_shift_; }

private:
    Eigen::VectorXcd weight_;  // C^-1 (s g)
    double null_sigma_ = 0.0;
    double mean_shift_ = 0.0;
    double threshold_ = 0.0;
    double size_ = 0.0;
    double location_ = 0.0;
};

/// alpha = k-th smallest of `values` with k = ceil((1 - pfa) n); 0 when
/// pfa = 1 (every positive statistic exceeds the threshold).
double empirical_upper_quantile(std::vector<double> values, double pfa);

struct ThresholdEntry {
    double threshold = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

/// Calibrated thresholds keyed by (detector, N, K, target pfa), with
/// provenance. Persists as CSV: detector,N,K,pfa,threshold,trials,seed.
class ThresholdTable {
public:
    std::optional<ThresholdEntry> find(const std::string& detector, int dim,
                                       int secondary, double pfa) const;
    void insert(const std::string& detector, int dim, int secondary,
                double pfa, const ThresholdEntry& entry);
    std::size_t size() const { return entries_.size(); }

    void write_csv(std::ostream& out) const;
    static ThresholdTable read_csv(std::istream& in);

private:
    using Key = std::tuple<std::string, int, int, double>;
    std::map<Key, ThresholdEntry> entries_;
};

}  // namespace leakdet
