#pragma once

#include "qrdyn/geometry.hpp"
#include "qrdyn/linearizer.hpp"
#include "qrdyn/numerics.hpp"
#include "qrdyn/powermap.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace qrdyn::infspace {

// Planar radial stretch: maps the circle of radius r onto the square
// {max(|u|,|v|) = r}. s(x) = (|x|_2 / |x|_inf) x, s(0) = 0. The max-norm
// component of the result is assigned directly so that
// ||s(x)||_inf == ||x||_2 holds exactly.
Eigen::Vector2d radial_stretch(const Eigen::Vector2d& x);

// Normalizing constant C = (pi e / 4)^(1/3) of the homogeneous model, the
// value that gives g(B(0,1)) the volume of the unit ball.
double model_constant();

// Degree-1 homogeneous model map g(u,v,w) = C (s(u,v), w/e).
Point3 homogeneous_model(const Point3& x);

MapHandle make_model_map();

// |f(rx) - r f(x)|, the defect against degree-1 homogeneity.
double homogeneity_defect(const MapHandle& f, double r, const PointN& x);

double unit_ball_volume(int n);

struct VolumeEstimate {
    double volume = 0.0;
    double standard_error = 0.0;
    double mean_abs_jacobian = 0.0;
    double mean_standard_error = 0.0;
    std::int64_t samples_used = 0;
    std::int64_t dropped = 0;
};

// Monte Carlo volume of f(B(x0, rho)) as the ball-average of the
// finite-difference |J_f| times the ball volume. Exact for injective f;
// injectivity is the caller's responsibility. Sampling is split into
// fixed-size chunks with per-chunk substreams and reduced in chunk order,
// so results are bit-identical for any worker-thread count (workers = 0
// picks the hardware concurrency).
VolumeEstimate monte_carlo_image_volume(const MapHandle& f, const PointN& x0, double rho,
                                        std::int64_t n_samples, std::uint64_t seed,
                                        unsigned workers = 0);

struct MeanRadiusEstimate {
    double value = 0.0;
    double rho = 0.0;
    std::int64_t samples_used = 0;
    std::int64_t dropped = 0;
    double standard_error = 0.0;
};

// Mean radius of the image of B(x0, rho): (|f(B(x0,rho))| / Omega_n)^(1/n).
MeanRadiusEstimate mean_radius(const MapHandle& f, const PointN& x0, double rho,
                               std::int64_t n_samples, std::uint64_t seed);

// (f(x0 + rho x) - f(x0)) / mean_radius(f, x0, rho).
PointN rescaled_map(const MapHandle& f, const PointN& x0, double rho, const PointN& x,
                    std::int64_t mc_samples = 200000, std::uint64_t seed = 0);

// max over the grid of |P(Z(g(rx))) - Z(g(r m^2 x))| / (1 + |Z(g(r m^2 x))|).
// Grid points whose evaluation overflows are skipped.
double l1_family_check(double r, const powermap::PowerMapParams& params,
                       const std::vector<Point3>& grid);

// Shape defect of the rescaled inverse family against a reference map:
//   min over k <= depth of max over the grid of |c_k m_k(x) - ref(x)|,
// where m_k(x) = Z^{-1}(Z(0) + rho_k x) on the central branch and c_k is
// the least-squares scalar fit (which absorbs the d^k similarity factor).
double shape_defect_against(const linearizer::RescaleSequence& rho_seq,
                            const std::vector<Point3>& grid,
                            const std::function<Point3(const Point3&)>& reference,
                            int depth = 12);

// Shape defect against the identity. A positive lower bound witnesses
// that the rescaling limits of Z^{-1} are not conformal, so no rescaled
// iterate family of P can converge back to Z.
double non_identity_shape_defect(const linearizer::RescaleSequence& rho_seq,
                                 const std::vector<Point3>& grid, int depth = 12);

// Default unit-sphere probe grid: 26-direction stencil plus a Fibonacci
// sphere layer.
std::vector<Point3> default_sphere_grid();

std::vector<Point3> fibonacci_sphere(int count);

}  // namespace qrdyn::infspace
