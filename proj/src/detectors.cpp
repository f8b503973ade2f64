#include "leakdet/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "leakdet/parallel.hpp"
#include "leakdet/rng.hpp"
#include "leakdet/special_functions.hpp"

namespace leakdet {

namespace {

const std::uint64_t kCalibrateLd = rng::phase_tag("calibrate:ld-scm");
const std::uint64_t kCalibrateRd = rng::phase_tag("calibrate:rd-scm");

Eigen::MatrixXcd hermitian_outer(const Eigen::MatrixXcd& z, double scale) {
    const int n = static_cast<int>(z.rows());
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
    s.selfadjointView<Eigen::Lower>().rankUpdate(z, scale);
    return s.selfadjointView<Eigen::Lower>();
}

Eigen::LLT<Eigen::MatrixXcd> factor(const Eigen::MatrixXcd& s,
                                    const char* who) {
    Eigen::LLT<Eigen::MatrixXcd> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(std::string(who) +
                                 ": sample covariance is rank deficient");
    return llt;
}

void require_invertible_scm(const Dataset& data, const char* who) {
    if (data.secondary_count() < data.dim())
        throw std::invalid_argument(
            std::string(who) + ": needs K >= N secondary snapshots");
}

Eigen::MatrixXcd standard_complex_block(int rows, int cols,
                                        rng::Stream& stream) {
    Eigen::MatrixXcd z(rows, cols);
    for (int k = 0; k < cols; ++k)
        for (int i = 0; i < rows; ++i) z(i, k) = stream.normal_complex();
    return z;
}

std::vector<double> canonical_null_statistics(
    int dim, int secondary_count, long trials, std::uint64_t seed,
    std::uint64_t phase, int threads,
    const std::function<double(const Eigen::VectorXcd&,
                               const Eigen::MatrixXcd&)>& statistic) {
    std::vector<double> values(trials);
    parallel_for(trials, threads, [&](long t) {
        rng::Stream z0_stream(seed, phase, static_cast<std::uint64_t>(t), 0);
        rng::Stream sec_stream(seed, phase, static_cast<std::uint64_t>(t), 1);
        Eigen::VectorXcd z0 = standard_complex_block(dim, 1, z0_stream);
        Eigen::MatrixXcd z = standard_complex_block(dim, secondary_count,
                                                    sec_stream);
        values[static_cast<std::size_t>(t)] = statistic(z0, hermitian_outer(z, 1.0));
    });
    return values;
}

void require_calibration_precision(double pfa, long trials) {
    if (!(pfa > 0.0) || pfa > 1.0)
        throw std::invalid_argument("calibrate: pfa must be in (0, 1]");
    if (static_cast<double>(trials) * pfa < 50.0)
        throw std::invalid_argument(
            "calibrate: trials must be at least 50 / pfa for a usable tail "
            "quantile");
}

}  // namespace

Eigen::MatrixXcd scm_sum(const Eigen::MatrixXcd& secondary) {
    if (secondary.cols() < 1)
        throw std::invalid_argument("scm_sum: need at least one snapshot");
    return hermitian_outer(secondary, 1.0);
}

Eigen::MatrixXcd scm_mean(const Eigen::MatrixXcd& secondary) {
    if (secondary.cols() < 1)
        throw std::invalid_argument("scm_mean: need at least one snapshot");
    return hermitian_outer(secondary, 1.0 / double(secondary.cols()));
}

PeakEstimate matched_peak(const Eigen::LLT<Eigen::MatrixXcd>& weight,
                          const Eigen::VectorXcd& z,
                          const SteeringTable& table) {
    const Eigen::MatrixXcd y = weight.matrixL().solve(table.vectors);
    const Eigen::VectorXcd u = weight.matrixL().solve(z);
    const Eigen::VectorXcd projections = y.adjoint() * u;

    PeakEstimate best;
    double best_ratio = -1.0;
    for (int p = 0; p < table.size(); ++p) {
        const double den = y.col(p).squaredNorm();
        if (!(den > 0.0)) continue;  // g(phi) vanishes here (e.g. at p_U)
        const double raw = projections[p].real();
        const double ratio = raw * raw / den;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = PeakEstimate{p, table.locations[static_cast<std::size_t>(p)],
                                ratio, raw, den};
        }
    }
    if (best.index < 0)
        throw std::runtime_error(
            "matched_peak: steering vanishes on the entire grid");
    return best;
}

PeakEstimate matched_peak(const Eigen::MatrixXcd& weight,
                          const Eigen::VectorXcd& z,
                          const SteeringTable& table) {
    return matched_peak(factor(weight, "matched_peak"), z, table);
}

double ld_scm_statistic(const Eigen::VectorXcd& z0,
                        const Eigen::MatrixXcd& scm_sum,
                        const Eigen::VectorXcd& steering) {
    if (!(steering.squaredNorm() > 0.0))
        throw std::invalid_argument("ld_scm_statistic: zero steering vector");
    const auto llt = factor(scm_sum, "ld_scm_statistic");
    const Eigen::VectorXcd u = llt.matrixL().solve(z0);
    const Eigen::VectorXcd y = llt.matrixL().solve(steering);
    const double raw = y.dot(u).real();  // Re{g^H S^-1 z0}
    const double den = (1.0 + u.squaredNorm()) * y.squaredNorm();
    return raw * raw / den;
}

LdScmEval ld_scm_evaluate(const Eigen::VectorXcd& z0,
                          const Eigen::MatrixXcd& scm_sum,
                          const SteeringTable& table) {
    const auto llt = factor(scm_sum, "ld_scm");
    PeakEstimate peak = matched_peak(llt, z0, table);
    const double z_quad = llt.matrixL().solve(z0).squaredNorm();
    return LdScmEval{peak.value / (1.0 + z_quad), peak};
}

double ld_scm_calibrate(const SteeringTable& table, int secondary_count,
                        double pfa, long trials, std::uint64_t seed,
                        int threads) {
    require_calibration_precision(pfa, trials);
    const int dim = static_cast<int>(table.vectors.rows());
    if (secondary_count < dim)
        throw std::invalid_argument("ld_scm_calibrate: needs K >= N");
    auto values = canonical_null_statistics(
        dim, secondary_count, trials, seed, kCalibrateLd, threads,
        [&](const Eigen::VectorXcd& z0, const Eigen::MatrixXcd& s) {
            return ld_scm_evaluate(z0, s, table).statistic;
        });
    return empirical_upper_quantile(std::move(values), pfa);
}

double rd_scm_calibrate(int dim, int secondary_count, double pfa, long trials,
                        std::uint64_t seed, int threads) {
    require_calibration_precision(pfa, trials);
    if (secondary_count < dim)
        throw std::invalid_argument("rd_scm_calibrate: needs K >= N");
    auto values = canonical_null_statistics(
        dim, secondary_count, trials, seed, kCalibrateRd, threads,
        [&](const Eigen::VectorXcd& z0, const Eigen::MatrixXcd& s) {
            return factor(s, "rd_scm").matrixL().solve(z0).squaredNorm();
        });
    return empirical_upper_quantile(std::move(values), pfa);
}

DetectionReport ld_scm_detect(const Dataset& data, const SteeringTable& table,
                              double threshold) {
    require_invertible_scm(data, "ld_scm_detect");
    const LdScmEval eval =
        ld_scm_evaluate(data.primary, scm_sum(data.secondary), table);

    DetectionReport report;
    report.detector = "ld-scm";
    report.statistic = eval.statistic;
    report.threshold = threshold;
    report.leak = eval.statistic > threshold;
    if (report.leak) {
        report.size_estimate = eval.peak.numerator / eval.peak.denominator;
        report.location_estimate = eval.peak.location;
    }
    return report;
}

DetectionReport rd_scm_detect(const Dataset& data, double threshold) {
    require_invertible_scm(data, "rd_scm_detect");
    const auto llt = factor(scm_sum(data.secondary), "rd_scm_detect");
    const double stat = llt.matrixL().solve(data.primary).squaredNorm();

    DetectionReport report;
    report.detector = "rd-scm";
    report.statistic = stat;
    report.threshold = threshold;
    report.leak = stat > threshold;
    return report;  // whole-vector estimation: no size/location estimates
}

OracleDetector OracleDetector::make(double size,
                                    double location,
                                    const Eigen::VectorXcd& steering,
                                    const Eigen::MatrixXd& covariance,
                                    double pfa) {
    if (!(pfa > 0.0) || !(pfa < 1.0))
        throw std::invalid_argument("oracle: pfa must be in (0, 1)");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("oracle: covariance is not positive definite");

    OracleDetector d;
    const Eigen::VectorXcd signal = size * steering;
    Eigen::VectorXcd weight(signal.size());
    weight.real() = llt.solve(signal.real().eval());
    weight.imag() = llt.solve(signal.imag().eval());
    d.weight_ = weight;
    d.mean_shift_ = weight.dot(signal).real();  // s^2 g^H C^-1 g
    if (!(d.mean_shift_ > 0.0))
        throw std::invalid_argument("oracle: degenerate signal");
    d.null_sigma_ = std::sqrt(d.mean_shift_ / 2.0);
    d.threshold_ = d.null_sigma_ * special::normal_upper_quantile(pfa);
    d.size_ = size;
    d.location_ = location;
    return d;
}

double OracleDetector::statistic(const Eigen::VectorXcd& z0) const {
    return weight_.dot(z0).real();  // Re{s g^H C^-1 z0}
}

DetectionReport OracleDetector::detect(const Eigen::VectorXcd& z0) const {
    DetectionReport report;
    report.detector = "oracle";
    report.statistic = statistic(z0);
    report.threshold = threshold_;
    report.leak = report.statistic > threshold_;
    if (report.leak) {
        report.size_estimate = size_;  // benchmark: parameters are known
        report.location_estimate = location_;
    }
    return report;
}

double empirical_upper_quantile(std::vector<double> values, double pfa) {
    if (values.empty())
        throw std::invalid_argument("empirical_upper_quantile: no samples");
    if (!(pfa >= 0.0) || pfa > 1.0)
        throw std::invalid_argument("empirical_upper_quantile: bad pfa");
    const long n = static_cast<long>(values.size());
    const long k = static_cast<long>(std::ceil((1.0 - pfa) * double(n)));
    if (k <= 0) return 0.0;
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[static_cast<std::size_t>(k - 1)];
}

std::optional<ThresholdEntry> ThresholdTable::find(const std::string& detector,
                                                   int dim, int secondary,
                                                   double pfa) const {
    const auto it = entries_.find(Key{detector, dim, secondary, pfa});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ThresholdTable::insert(const std::string& detector, int dim,
                            int secondary, double pfa,
                            const ThresholdEntry& entry) {
    entries_[Key{detector, dim, secondary, pfa}] = entry;
}

void ThresholdTable::write_csv(std::ostream& out) const {
    out << "detector,N,K,pfa,threshold,trials,seed\n";
    for (const auto& [key, entry] : entries_) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%d,%d,%.10g,%.12g,%ld,%llu\n",
                      std::get<0>(key).c_str(), std::get<1>(key),
                      std::get<2>(key), std::get<3>(key), entry.threshold,
                      entry.trials,
                      static_cast<unsigned long long>(entry.seed));
        out << line;
    }
}

ThresholdTable ThresholdTable::read_csv(std::istream& in) {
    ThresholdTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("threshold table: empty file");
    if (line.rfind("detector,", 0) != 0)
        throw std::runtime_error("threshold table: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string detector, field;
        ThresholdEntry entry;
        int dim = 0, secondary = 0;
        double pfa = 0.0;
        std::getline(row, detector, ',');
        std::getline(row, field, ',');
        dim = std::stoi(field);
        std::getline(row, field, ',');
        secondary = std::stoi(field);
        std::getline(row, field, ',');
        pfa = std::stod(field);
        std::getline(row, field, ',');
        entry.threshold = std::stod(field);
        std::getline(row, field, ',');
        entry.trials = std::stol(field);
        std::getline(row, field, ',');
        entry.seed = std::stoull(field);
        table.insert(detector, dim, secondary, pfa, entry);
    }
    return table;
}

}  // namespace leakdet
