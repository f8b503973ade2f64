#include "leakdet/hydraulics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace leakdet {

namespace {

constexpr cxd imag_unit{0.0, 1.0};

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("hydraulics: " + what);
}

}  // namespace

PipeSystem PipeSystem::make(double length, double diameter, double wave_speed,
                            double friction, double steady_discharge,
                            double gravity, double leak_head,
                            double leak_elevation, double upstream) {
    require(length > 0.0, "pipe length must be positive");
    require(diameter > 0.0, "pipe diameter must be positive");
    require(wave_speed > 0.0, "wave speed must be positive");
    require(gravity > 0.0, "gravity must be positive");
    require(friction >= 0.0, "friction factor must be nonnegative");
    require(steady_discharge >= 0.0, "steady discharge must be nonnegative");
    require(leak_head - leak_elevation > 0.0,
            "leak head must exceed leak elevation");

    PipeSystem p{};
    p.length = length;
    p.diameter = diameter;
    p.wave_speed = wave_speed;
    p.friction = friction;
    p.steady_discharge = steady_discharge;
    p.gravity = gravity;
    p.leak_head = leak_head;
    p.leak_elevation = leak_elevation;
    p.upstream = upstream;
    p.downstream = upstream + length;
    p.area = std::numbers::pi * diameter * diameter / 4.0;
    p.resistance = friction * steady_discharge /
                   (gravity * diameter * p.area * p.area);
    return p;
}

PipeSystem PipeSystem::reference() {
    return make(2000.0, 0.5, 1000.0, 0.02, 0.0153, 9.8, 23.5, 0.0, 0.0);
}

double PipeSystem::leak_gain() const {
    return std::sqrt(gravity / (2.0 * (leak_head - leak_elevation)));
}

double PipeSystem::fundamental_frequency() const {
    return wave_speed * std::numbers::pi / (2.0 * length);
}

MeasurementGrid MeasurementGrid::make(std::vector<double> sensors,
                                      std::vector<double> omegas,
                                      const PipeSystem& pipe) {
    require(!sensors.empty(), "at least one sensor required");
    require(!omegas.empty(), "at least one frequency required");
    for (std::size_t m = 0; m < sensors.size(); ++m) {
        require(sensors[m] > pipe.upstream && sensors[m] <= pipe.downstream,
                "sensor position " + std::to_string(sensors[m]) +
                    " outside (p_U, p_D]");
        if (m > 0)
            require(sensors[m] > sensors[m - 1],
                    "sensor positions must be strictly increasing");
    }
    for (double w : omegas)
        require(w > 0.0, "angular frequencies must be positive");
    return MeasurementGrid{std::move(sensors), std::move(omegas)};
}

MeasurementGrid MeasurementGrid::harmonics(std::vector<double> sensors,
                                           int count, const PipeSystem& pipe) {
    require(count >= 1, "harmonic count must be at least 1");
    std::vector<double> omegas(count);
    const double w_th = pipe.fundamental_frequency();
    for (int j = 0; j < count; ++j) omegas[j] = (j + 1) * w_th;
    return make(std::move(sensors), std::move(omegas), pipe);
}

cxd propagation(double omega, const PipeSystem& pipe) {
    if (!(omega > 0.0))
        throw std::invalid_argument("hydraulics: frequency must be positive");
    const cxd radicand =
        cxd{-omega * omega, 0.0} +
        imag_unit * (pipe.gravity * pipe.area * omega * pipe.resistance);
    return std::sqrt(radicand) / pipe.wave_speed;  // principal branch, Re >= 0
}

cxd impedance(double omega, const PipeSystem& pipe) {
    const cxd mu = propagation(omega, pipe);
    return mu * pipe.wave_speed * pipe.wave_speed /
           (imag_unit * omega * pipe.gravity * pipe.area);
}

Eigen::Matrix2cd field_matrix(double x, double omega, const PipeSystem& pipe) {
    const cxd mu = propagation(omega, pipe);
    const cxd Z = impedance(omega, pipe);
    const cxd ch = std::cosh(mu * x);
    const cxd sh = std::sinh(mu * x);
    Eigen::Matrix2cd m;
    m << ch, -sh / Z, -Z * sh, ch;
    return m;
}

Eigen::Matrix2cd leak_field_matrix(double phi, double x, double omega,
                                   const PipeSystem& pipe) {
    const cxd mu = propagation(omega, pipe);
    const cxd Z = impedance(omega, pipe);
    const double gain = pipe.leak_gain();
    const cxd sh_phi = std::sinh(mu * phi);
    const cxd ch_phi = std::cosh(mu * phi);
    const cxd sh_seg = std::sinh(mu * (x - phi));
    const cxd ch_seg = std::cosh(mu * (x - phi));
    Eigen::Matrix2cd m;
    m << Z * sh_phi * ch_seg, -ch_phi * ch_seg,
        -Z * Z * sh_phi * sh_seg, Z * ch_phi * sh_seg;
    return gain * m;
}

cxd no_leak_head(double x, double omega, cxd upstream_flow,
                 const PipeSystem& pipe) {
    const cxd mu = propagation(omega, pipe);
    const cxd Z = impedance(omega, pipe);
    return -Z * std::sinh(mu * (x - pipe.upstream)) * upstream_flow;
}

cxd upstream_flow_from_probe(cxd probe_head, double eps, double omega,
                             const PipeSystem& pipe) {
    if (!(eps > 0.0))
        throw std::invalid_argument(
            "hydraulics: probe offset must be positive");
    const cxd mu = propagation(omega, pipe);
    const cxd Z = impedance(omega, pipe);
    return -probe_head / (Z * std::sinh(mu * eps));
}

namespace {

void require_spectrum(const MeasurementGrid& grid,
                      const Eigen::VectorXcd& upstream_flow) {
    if (upstream_flow.size() != grid.frequency_count())
        throw std::invalid_argument(
            "hydraulics: upstream flow spectrum needs one entry per "
            "frequency");
}

}  // namespace

Eigen::VectorXcd no_leak_heads(const MeasurementGrid& grid,
                               const PipeSystem& pipe,
                               const Eigen::VectorXcd& upstream_flow) {
    require_spectrum(grid, upstream_flow);
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.frequency_count(); ++j) {
        const double w = grid.omegas[j];
        const cxd mu = propagation(w, pipe);
        const cxd Z = impedance(w, pipe);
        for (int m = 0; m < grid.sensor_count(); ++m)
            out[grid.index(m, j)] =
                -Z * std::sinh(mu * (grid.sensors[m] - pipe.upstream)) *
                upstream_flow[j];
    }
    return out;
}

Eigen::VectorXcd steering_vector(double phi, const MeasurementGrid& grid,
                                 const PipeSystem& pipe,
                                 const Eigen::VectorXcd& upstream_flow) {
    if (phi < pipe.upstream || phi > pipe.downstream)
        throw std::invalid_argument(
            "hydraulics: leak location outside [p_U, p_D]");
    require_spectrum(grid, upstream_flow);
    const double gain = pipe.leak_gain();
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.frequency_count(); ++j) {
        const double w = grid.omegas[j];
        const cxd mu = propagation(w, pipe);
        const cxd Z = impedance(w, pipe);
        const cxd sh_phi = std::sinh(mu * (phi - pipe.upstream));
        for (int m = 0; m < grid.sensor_count(); ++m) {
            const cxd sh_seg = std::sinh(mu * (grid.sensors[m] - phi));
            out[grid.index(m, j)] =
                -gain * Z * Z * sh_seg * sh_phi * upstream_flow[j];
        }
    }
    return out;
}

Eigen::VectorXcd forward_heads(double phi, double size,
                               const MeasurementGrid& grid,
                               const PipeSystem& pipe,
                               const Eigen::VectorXcd& upstream_flow) {
    if (phi < pipe.upstream || phi > pipe.downstream)
        throw std::invalid_argument(
            "hydraulics: leak location outside [p_U, p_D]");
    require_spectrum(grid, upstream_flow);
    const double lambda = size * pipe.leak_gain();
    Eigen::VectorXcd out(grid.size());
    for (int j = 0; j < grid.frequency_count(); ++j) {
        const double w = grid.omegas[j];
        Eigen::Matrix2cd junction;
        junction << 1.0, -lambda, 0.0, 1.0;
        const Eigen::Matrix2cd up =
            junction * field_matrix(phi - pipe.upstream, w, pipe);
        for (int m = 0; m < grid.sensor_count(); ++m) {
            const Eigen::Matrix2cd t =
                field_matrix(grid.sensors[m] - phi, w, pipe) * up;
            // state at p_U is (q, h) = (q_U, 0): reservoir boundary
            const Eigen::Vector2cd state =
                t * Eigen::Vector2cd(upstream_flow[j], cxd{0.0, 0.0});
            out[grid.index(m, j)] = state[1];
        }
    }
    return out;
}

Eigen::VectorXcd unit_spectrum(int frequency_count) {
    return Eigen::VectorXcd::Ones(frequency_count);
}

std::vector<double> location_grid(const PipeSystem& pipe, double step,
                                  double guard) {
    require(step > 0.0, "location grid step must be positive");
    require(guard >= 0.0, "guard band must be nonnegative");
    std::vector<double> out;
    const double first = pipe.upstream + guard;
    const int count =
        static_cast<int>(std::floor((pipe.downstream - first) / step + 1e-9));
    out.reserve(count + 1);
    for (int i = 0; i <= count; ++i) out.push_back(first + i * step);
    if (out.empty() || out.back() < pipe.downstream - 1e-9)
        out.push_back(pipe.downstream);
    return out;
}

SteeringTable SteeringTable::build(const std::vector<double>& locations,
                                   const MeasurementGrid& grid,
                                   const PipeSystem& pipe,
                                   const Eigen::VectorXcd& upstream_flow) {
    if (locations.empty())
        throw std::invalid_argument("hydraulics: empty location grid");
    SteeringTable table;
    table.locations = locations;
    table.vectors.resize(grid.size(), static_cast<int>(locations.size()));
    for (std::size_t p = 0; p < locations.size(); ++p)
        table.vectors.col(static_cast<int>(p)) =
            steering_vector(locations[p], grid, pipe, upstream_flow);
    return table;
}

SteeringTable SteeringTable::build(const std::vector<double>& locations,
                                   const MeasurementGrid& grid,
                                   const PipeSystem& pipe) {
    return build(locations, grid, pipe, unit_spectrum(grid.frequency_count()));
}

}  // namespace leakdet
