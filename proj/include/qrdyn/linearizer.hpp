#pragma once

#include "qrdyn/errors.hpp"
#include "qrdyn/geometry.hpp"
#include "qrdyn/numerics.hpp"
#include "qrdyn/zorich.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qrdyn::linearizer {

// Strictly decreasing positive rescale factors rho_k. Geometric sequences
// rho_k = base^{-k} are the default choice; explicit lists support
// experiment-specific sequences.
class RescaleSequence {
public:
    static RescaleSequence geometric(double base);
    static RescaleSequence explicit_list(std::vector<double> values);

    double rho(int k) const;
    std::optional<int> max_depth() const;  // bound for explicit lists
    bool is_geometric() const { return base_ > 1.0; }
    double base() const { return base_; }

private:
    RescaleSequence() = default;
    double base_ = 0.0;
    std::vector<double> values_;
};

// Specification of one linearizer approximant family
//   L_k(x) = f^k(x0 + rho_k x)
// around a repelling fixed point x0 of f.
struct LinearizerApprox {
    MapHandle map;
    PointN fixed_point;
    RescaleSequence rescale = RescaleSequence::geometric(2.0);
    int depth = 0;
    double domain_radius = 1.0;  // cap on |x|
};

// Thrown when an orbit leaves the floating range; carries the last
// finite iterate and the step at which iteration stopped.
class orbit_truncation : public overflow_error {
public:
    orbit_truncation(PointN last, int step)
        : overflow_error("orbit left the floating range at step " + std::to_string(step)),
          last_(std::move(last)),
          step_(step) {}
    const PointN& last_iterate() const { return last_; }
    int step() const { return step_; }

private:
    PointN last_;
    int step_;
};

// f^k(x0 + rho_k x) by iterated application. Maps with an anchored form
// iterate in deviation coordinates, which keeps the exponentially small
// initial offsets meaningful. linearizer_approx(spec, 0) == x0 exactly.
PointN linearizer_approx(const LinearizerApprox& spec, const PointN& x);

// The approximant family as a plain map handle.
MapHandle make_map(const LinearizerApprox& spec);

// Difference quotient (f(x0 + rho x) - f(x0)) / rho; for differentiable f
// this tends to f'(x0) x as rho -> 0.
PointN generalized_derivative_approx(const MapHandle& f, const PointN& x0, double rho,
                                     const PointN& x);

// Koenigs approximant p^k(z0 + z / p'(z0)^k) for a complex polynomial
// with repelling fixed point z0. Complex numbers travel as (re, im).
Eigen::Vector2d koenigs_polynomial(const std::vector<Eigen::Vector2d>& coeffs,
                                   const Eigen::Vector2d& z0, int k,
                                   const Eigen::Vector2d& z);

// A complex polynomial as a planar map handle; coefficient j multiplies
// z^j. The anchored overload attaches the Taylor-shifted deviation form
// at the given point.
MapHandle make_polynomial_map(const std::vector<Eigen::Vector2d>& coeffs);
MapHandle make_polynomial_map(const std::vector<Eigen::Vector2d>& coeffs,
                              const Eigen::Vector2d& anchor);

// A generalized derivative psi: either a scaling x -> s x or a general
// linear map.
class Similarity {
public:
    static Similarity scaling(double s);
    static Similarity linear(Mat a);

    PointN apply(const PointN& x, int power = 1) const;
    bool is_scalar() const { return scalar_.has_value(); }
    double scalar() const { return scalar_.value(); }

private:
    Similarity() = default;
    std::optional<double> scalar_;
    Mat mat_, mat_inverse_;
};

// max over the grid of |f(L(x)) - L(psi x)| / (1 + |L(psi x)|).
double functional_equation_residual(const MapHandle& L, const MapHandle& f,
                                    const Similarity& psi, const std::vector<PointN>& grid);

struct ConjugacyOptions {
    std::vector<double> sample_radii{0.25, 0.5, 1.0};
    NewtonOptions newton{};
    double min_success_fraction = 0.5;
    double dilatation_fd_step = 1e-5;
};

// Sampled conjugacy G = L^{-1} o M between two linearizers of one map at
// one fixed point, with its linear and scalar least-squares fits and the
// dilatation of the extension G = psi_L^k o G o psi_M^{-k}.
struct ConjugacyEstimate {
    std::vector<std::pair<PointN, PointN>> samples;  // (x, G(x))
    Mat linear_fit;
    double linear_residual = 0.0;
    double scalar_fit = 0.0;
    double scalar_residual = 0.0;
    std::vector<double> dilatation_by_depth;  // max K at extension depth 0..D
    int dropped = 0;
    int attempted = 0;
};

ConjugacyEstimate conjugacy_estimate(const LinearizerApprox& L, const LinearizerApprox& M,
                                     const Similarity& psi_L, const Similarity& psi_M,
                                     int extension_depth, const ConjugacyOptions& opts = {});

// Pointwise G = L^{-1} o M between two sampled linearizers of the same
// map, with the structural inverse M^{-1} o L attached. Closed-form
// inverses on L or M are used when present; Newton otherwise.
MapHandle conjugacy_map(const MapHandle& L, const MapHandle& M,
                        const NewtonOptions& newton = {});

// Operator norm of the commutator G0 A - A G0.
double commutation_defect(const Mat& g0, const Mat& a);

struct TransferResult {
    double residual = 0.0;
    int dropped = 0;
    int attempted = 0;
};

// max over grid and generators of |L(G(gamma(G^{-1}(x)))) - L(x)|.
// Conjugating the deck transformations of one linearizer by G must leave
// the other invariant; this measures how well a sampled G achieves that.
TransferResult automorphy_transfer_check(const MapHandle& L, const MapHandle& G,
                                         const std::vector<zorich::IsometryElement>& gens,
                                         const std::vector<PointN>& grid,
                                         const NewtonOptions& newton = {});

// Deterministic unit directions: coordinate axes, full diagonals, and for
// dimension 3 the edge diagonals (the classic 26-point stencil).
std::vector<PointN> stencil_directions(int dim);

inline constexpr double kOrbitCap = 1e150;
inline constexpr double kFixedPointTol = 1e-10;

}  // namespace qrdyn::linearizer
