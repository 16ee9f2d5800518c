#include "qrdyn/numerics.hpp"

#include "qrdyn/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace qrdyn {

MapHandle make_linear_map(const Mat& a, const std::string& label) {
    MapHandle h;
    h.dim = static_cast<int>(a.rows());
    h.label = label;
    h.eval = [a](const PointN& x) -> PointN { return a * x; };
    h.anchor = PointN::Zero(h.dim);
    h.eval_deviation = h.eval;
    return h;
}

Mat fd_jacobian(const std::function<PointN(const PointN&)>& f, const PointN& x,
                double step) {
    const int n = static_cast<int>(x.size());
    Mat jac(n, n);
    for (int j = 0; j < n; ++j) {
        PointN xp = x, xm = x;
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        // divide by the realized step: exact for linear maps
        const double realized = xp[j] - xm[j];
        const PointN diff = f(xp) - f(xm);
        jac.col(j) = diff / realized;
    }
    return jac;
}

double fd_jacobian_determinant(const std::function<PointN(const PointN&)>& f,
                               const PointN& x, double step) {
    return fd_jacobian(f, x, step).determinant();
}

namespace {

double residual_norm(const std::function<PointN(const PointN&)>& f, const PointN& g,
                     const PointN& y) {
    const PointN r = f(g) - y;
    return r.norm();
}

std::optional<PointN> newton_single(const std::function<PointN(const PointN&)>& f,
                                    const PointN& y, PointN g,
                                    const NewtonOptions& opts) {
    const double target = opts.tol * (1.0 + y.norm());
    double rnorm;
    try {
        rnorm = residual_norm(f, g, y);
    } catch (const error&) {
        return std::nullopt;
    }
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (rnorm <= target) return g;
        Mat jac;
        PointN r;
        try {
            r = f(g) - y;
            jac = fd_jacobian(f, g, opts.fd_step * std::max(1.0, g.norm()));
        } catch (const error&) {
            return std::nullopt;
        }
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) return std::nullopt;
        const PointN delta = lu.solve(-r);
        bool accepted = false;
        double lambda = 1.0;
        for (int half = 0; half < 7; ++half, lambda *= 0.5) {
            const PointN trial = g + lambda * delta;
            double trial_norm;
            try {
                trial_norm = residual_norm(f, trial, y);
            } catch (const error&) {
                continue;
            }
            if (trial_norm < rnorm * (1.0 - 0.25 * lambda) || trial_norm <= target) {
                g = trial;
                rnorm = trial_norm;
                accepted = true;
                break;
            }
        }
        if (!accepted) return std::nullopt;
    }
    return rnorm <= target ? std::optional<PointN>(g) : std::nullopt;
}

}  // namespace

std::optional<PointN> newton_invert(const std::function<PointN(const PointN&)>& f,
                                    const PointN& y, const PointN& start,
                                    const NewtonOptions& opts) {
    if (auto g = newton_single(f, y, start, opts)) return g;
    const int n = static_cast<int>(start.size());
    const double scale = opts.seed_spread * std::max(1.0, start.norm());
    for (int s = 0; s < opts.multistart; ++s) {
        PointN seed = start;
        for (int i = 0; i < n; ++i) {
            // deterministic +-1 pattern over seeds and coordinates
            const double sign = (((s >> (i % 4)) & 1) == 0) ? 1.0 : -1.0;
            seed[i] += sign * scale * (1.0 + 0.25 * s + 0.125 * i);
        }
        if (auto g = newton_single(f, y, seed, opts)) return g;
    }
    return std::nullopt;
}

}  // namespace qrdyn
