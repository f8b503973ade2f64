#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace leakdet {

using cxd = std::complex<double>;

/// Reservoir-pipe-valve system: physical constants plus the derived
/// cross-section area and steady-state resistance.
///
/// Units: lengths in m, wave speed in m/s, discharge in m^3/s, heads in m.
struct PipeSystem {
    double length;           // l
    double diameter;         // D
    double wave_speed;       // a
    double friction;         // Darcy-Weisbach f (dimensionless)
    double steady_discharge; // Q0
    double gravity;          // g
    double leak_head;        // H0^L, steady head at the leak
    double leak_elevation;   // e^L
    double upstream;         // p_U
    double downstream;       // p_D = p_U + l
    double area;             // A = pi D^2 / 4
    double resistance;       // R = f Q0 / (g D A^2)

    /// Validates the raw constants and fills the derived quantities.
    static PipeSystem make(double length, double diameter, double wave_speed,
                           double friction, double steady_discharge,
                           double gravity, double leak_head,
                           double leak_elevation, double upstream = 0.0);

    static PipeSystem reference();  // l=2000, D=0.5, a=1000, f=0.02, Q0=0.0153,
                                    // g=9.8, H0L=23.5, eL=0

    /// sqrt(g / (2 (H0L - eL))), the orifice gain of the leak junction.
    double leak_gain() const;

    /// Fundamental (first resonant) angular frequency a*pi/(2 l).
    double fundamental_frequency() const;
};

/// Sensor positions x_1..x_M and angular frequencies w_1..w_J.
/// Vectorized quantities use index n = m*J + j (0-based, frequency fastest),
/// matching vec[g_m(w_j), j=1..J, m=1..M].
struct MeasurementGrid {
    std::vector<double> sensors;  // strictly increasing, each in (p_U, p_D]
    std::vector<double> omegas;   // strictly positive [rad/s]

    static MeasurementGrid make(std::vector<double> sensors,
                                std::vector<double> omegas,
                                const PipeSystem& pipe);

    /// Grid at the first `count` harmonics j*w_th of the pipe.
    static MeasurementGrid harmonics(std::vector<double> sensors, int count,
                                     const PipeSystem& pipe);

    int sensor_count() const { return static_cast<int>(sensors.size()); }
    int frequency_count() const { return static_cast<int>(omegas.size()); }
    int size() const { return sensor_count() * frequency_count(); }
    int index(int m, int j) const { return m * frequency_count() + j; }
};

/// Propagation function mu = a^-1 sqrt(-w^2 + i g A w R), principal branch
/// (Re mu >= 0, the decaying-wave convention; reduces to i w/a when f = 0).
cxd propagation(double omega, const PipeSystem& pipe);

/// Characteristic impedance Z = mu a^2 / (i w g A).
cxd impedance(double omega, const PipeSystem& pipe);

/// Field matrix M0(x) propagating the state (q, h) over a pipe segment:
///   [ cosh(mu x)     -sinh(mu x)/Z ]
///   [ -Z sinh(mu x)   cosh(mu x)   ]
Eigen::Matrix2cd field_matrix(double x, double omega, const PipeSystem& pipe);

/// Leak matrix M1(phi) such that
///   M0(x - phi) * [[1, -lambda],[0, 1]] * M0(phi) = M0(x) + s * M1(phi)
/// with lambda = s * leak_gain(), the linearized orifice junction.
Eigen::Matrix2cd leak_field_matrix(double phi, double x, double omega,
                                   const PipeSystem& pipe);

/// No-leak head at x: h0 = -Z sinh(mu x) q(p_U) (reservoir boundary h(p_U)=0).
cxd no_leak_head(double x, double omega, cxd upstream_flow,
                 const PipeSystem& pipe);

/// Inverts the no-leak head map at a probe near the upstream node:
///   q(p_U) = -h(p_U + eps) / (Z sinh(mu eps)),  0 < eps << l.
cxd upstream_flow_from_probe(cxd probe_head, double eps, double omega,
                             const PipeSystem& pipe);

/// All no-leak heads on the grid, vectorized in grid order.
Eigen::VectorXcd no_leak_heads(const MeasurementGrid& grid,
                               const PipeSystem& pipe,
                               const Eigen::VectorXcd& upstream_flow);

/// Leak signature g(phi): entry (m, j) is
///   -sqrt(g) Z^2 sinh(mu (x_m - phi)) sinh(mu phi) q(p_U, w_j)
///    / sqrt(2 (H0L - eL)).
/// upstream_flow has one entry per frequency; pass unit_spectrum(J) for the
/// default flat excitation.
Eigen::VectorXcd steering_vector(double phi, const MeasurementGrid& grid,
                                 const PipeSystem& pipe,
                                 const Eigen::VectorXcd& upstream_flow);

/// Heads under a leak of size s at phi via the exact 2x2 transfer product.
/// Agrees with no_leak_heads + s * steering_vector.
Eigen::VectorXcd forward_heads(double phi, double size,
                               const MeasurementGrid& grid,
                               const PipeSystem& pipe,
                               const Eigen::VectorXcd& upstream_flow);

Eigen::VectorXcd unit_spectrum(int frequency_count);

/// Candidate leak locations [p_U + guard, p_D] at the given spacing.
/// The guard band avoids the removable 0/0 of the GLRT ratio at p_U,
/// where g vanishes identically.
std::vector<double> location_grid(const PipeSystem& pipe, double step = 1.0,
                                  double guard = 1.0);

/// Precomputed steering vectors over a location grid; column p is g(phi_p).
struct SteeringTable {
    std::vector<double> locations;
    Eigen::MatrixXcd vectors;  // N x P

    static SteeringTable build(const std::vector<double>& locations,
                               const MeasurementGrid& grid,
                               const PipeSystem& pipe,
                               const Eigen::VectorXcd& upstream_flow);
    static SteeringTable build(const std::vector<double>& locations,
                               const MeasurementGrid& grid,
                               const PipeSystem& pipe);

    int size() const { return static_cast<int>(locations.size()); }
};

}  // namespace leakdet
