#pragma once

#include "qrdyn/geometry.hpp"
#include "qrdyn/numerics.hpp"

#include <vector>

namespace qrdyn::zorich {

// Index of a square beam in the {w=0} lattice of side pi. Beam (i,j)
// covers u in [i*pi - pi/2, i*pi + pi/2], v in [j*pi - pi/2, j*pi + pi/2].
struct BeamAddress {
    long i = 0;
    long j = 0;

    int parity() const { return static_cast<int>(((i + j) % 2 + 2) % 2); }
    bool operator==(const BeamAddress&) const = default;
};

// A point folded into the central beam [-pi/2, pi/2]^2 x R by wall
// reflections. Unfolding via u = i*pi + (-1)^i u', v = j*pi + (-1)^j v'
// recovers the original point.
struct FoldResult {
    Point3 local = Point3::Zero();
    BeamAddress address;
    bool odd_parity = false;
};

// Orientation-preserving or -reversing isometry of R^3 that fixes the
// vertical direction: (u,v,w) -> (eps_u*u + t_u, eps_v*v + t_v, w) with
// eps = +-1 and t a multiple of pi.
class IsometryElement {
public:
    static IsometryElement identity();
    static IsometryElement translation(double t_u, double t_v);
    // Point rotation by pi about the vertical line through (c_u, c_v):
    // (u,v) -> (2c_u - u, 2c_v - v). Centers must lie on the half-lattice.
    static IsometryElement point_rotation(double c_u, double c_v);
    static IsometryElement reflection_u(double wall_u);  // u -> 2*wall_u - u

    Point3 apply(const Point3& x) const;
    PointN apply(const PointN& x) const;  // acts on coordinates 0,1

    double flip_u() const { return flip_u_; }
    double flip_v() const { return flip_v_; }
    double t_u() const { return t_u_; }
    double t_v() const { return t_v_; }

private:
    IsometryElement(double fu, double fv, double tu, double tv);
    double flip_u_ = 1.0, flip_v_ = 1.0;
    double t_u_ = 0.0, t_v_ = 0.0;
};

// Bi-Lipschitz map from the central square onto the closed upper unit
// hemisphere:
//   h(u,v) = (u sinM / r, v sinM / r, cosM),  M = max(|u|,|v|), r = |(u,v)|
// with the continuous limit h(0,0) = (0,0,1).
Point3 hemisphere_map(double u, double v);

// Inverse of hemisphere_map. Requires |p| = 1 (to 1e-9) and p.z >= 0.
Eigen::Vector2d hemisphere_inverse(const Point3& p);

FoldResult fold_to_central(const Point3& x);

Point3 unfold(const Point3& local, const BeamAddress& address);

// Z(u,v,w) = e^w h(u,v) on the central beam, extended everywhere by
// reflections in beam walls (domain) and in {w=0} (image). |Z(x)| = e^w.
Point3 zorich_eval(const Point3& x);

// Evaluation using a prescribed beam address instead of the folded one.
// Wall-continuity diagnostics compare adjacent beams through this.
Point3 eval_in_beam(const Point3& x, const BeamAddress& address);

// The preimage of y under Z lying over the requested beam. The branch
// parity must match the half-space of y: preimages of the open upper
// half-space live over even beams, of the lower over odd beams; plane
// points sit on beam walls and accept either.
Point3 zorich_invert(const Point3& y, const BeamAddress& branch);

// max over samples of |Z(g(x)) - Z(x)|.
double invariance_residual(const IsometryElement& g, const std::vector<Point3>& samples);

// Z(u) - Z(0) for u in the central beam, accurate relative to |u| for
// small u (no absorption against the base point (0,0,1)).
Point3 deviation_eval(const Point3& u);

// Z^{-1}((0,0,1) + d) on the central branch, accurate relative to |d|.
// Valid for |d| < 1 (the shifted point must stay off the vertical axis
// ray below the origin).
Point3 deviation_invert(const Point3& d);

// Z as a MapHandle (3-D, anchored at the origin in the domain sense is
// not applicable; plain evaluator only).
MapHandle make_zorich_map();

// The branch of Z^{-1} over the given beam as a MapHandle; the central
// branch is anchored at (0,0,1) through deviation_invert.
MapHandle make_zorich_inverse_map(const BeamAddress& branch = {});

inline constexpr double kWExponentCap = 700.0;

}  // namespace qrdyn::zorich
