#pragma once

#include "qrdyn/geometry.hpp"

#include <functional>
#include <optional>
#include <string>

namespace qrdyn {

// A dynamical map R^n -> R^n. `eval` must be deterministic; partiality is
// signalled by throwing (domain_error, overflow_error).
//
// A map may additionally carry an anchored form at a base point:
// `eval_deviation` maps d to f(anchor + d) - anchor_image computed to
// relative accuracy in d, where anchor_image is the exact image of the
// anchor (equal to the anchor itself at a fixed point). It must accept
// any d, falling back to plain evaluation internally where the
// small-deviation form stops applying. Iterating f from points
// exponentially close to a fixed point (the linearizer construction does
// exactly that) is hopeless in absolute coordinates -- forming x0 + d
// rounds d to the spacing of doubles near x0 -- so maps that can provide
// the anchored form should.
struct MapHandle {
    int dim = 0;
    std::string label;
    std::function<PointN(const PointN&)> eval;

    // optional closed-form inverse; Newton inversion is the fallback
    std::function<PointN(const PointN&)> eval_inverse;

    PointN anchor;        // empty when no anchored form is available
    PointN anchor_image;  // empty means "equal to anchor"
    std::function<PointN(const PointN&)> eval_deviation;

    bool has_anchor() const { return anchor.size() == dim && static_cast<bool>(eval_deviation); }

    bool anchored_at_fixed_point(const PointN& x0, double tol) const {
        if (!has_anchor() || (anchor - x0).norm() > tol) return false;
        return anchor_image.size() == 0 || (anchor_image - x0).norm() <= tol;
    }

    PointN operator()(const PointN& x) const { return eval(x); }
};

MapHandle make_linear_map(const Mat& a, const std::string& label = "linear");

// Central-difference Jacobian with an absolute step, dividing by the
// realized step (x+h) - (x-h) rather than 2h, so linear maps come out
// exact. Callers pick a step matching their feature scale.
Mat fd_jacobian(const std::function<PointN(const PointN&)>& f, const PointN& x,
                double step = 1e-6);

double fd_jacobian_determinant(const std::function<PointN(const PointN&)>& f,
                               const PointN& x, double step = 1e-6);

struct NewtonOptions {
    double tol = 1e-10;       // on |f(g) - y| / (1 + |y|)
    int max_iterations = 50;
    double fd_step = 1e-6;    // scaled by max(1, |g|)
    int multistart = 8;       // perturbed seeds tried after a failure
    double seed_spread = 0.1;
};

// Damped Newton solve of f(g) = y with finite-difference Jacobians.
// Returns nullopt when every start fails. Exceptions thrown by f during
// a trial step reject the step instead of propagating.
std::optional<PointN> newton_invert(const std::function<PointN(const PointN&)>& f,
                                    const PointN& y, const PointN& start,
                                    const NewtonOptions& opts = {});

}  // namespace qrdyn
