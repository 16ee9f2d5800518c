#include "qrdyn/linearizer.hpp"

#include "qrdyn/linmap.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <memory>

namespace qrdyn::linearizer {

RescaleSequence RescaleSequence::geometric(double base) {
    if (!(base > 1.0)) throw domain_error("geometric rescale base must exceed 1");
    RescaleSequence seq;
    seq.base_ = base;
    return seq;
}

RescaleSequence RescaleSequence::explicit_list(std::vector<double> values) {
    if (values.empty()) throw domain_error("rescale list must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) throw domain_error("rescale factors must be positive");
        if (i > 0 && !(values[i] < values[i - 1]))
            throw domain_error("rescale factors must be strictly decreasing");
    }
    RescaleSequence seq;
    seq.values_ = std::move(values);
    return seq;
}

double RescaleSequence::rho(int k) const {
    if (k < 0) throw domain_error("rescale index must be non-negative");
    if (base_ > 1.0) {
        // integer power by squaring; exact while base^k stays below 2^53
        double result = 1.0, factor = base_;
        for (int e = k; e > 0; e >>= 1) {
            if (e & 1) result *= factor;
            factor *= factor;
        }
        return 1.0 / result;
    }
    if (static_cast<std::size_t>(k) >= values_.size())
        throw domain_error("rescale index beyond the explicit list");
    return values_[static_cast<std::size_t>(k)];
}

std::optional<int> RescaleSequence::max_depth() const {
    if (base_ > 1.0) return std::nullopt;
    return static_cast<int>(values_.size()) - 1;
}

namespace {

void validate_spec(const LinearizerApprox& spec) {
    if (spec.map.dim != spec.fixed_point.size())
        throw domain_error("linearizer: map dimension does not match the fixed point");
    if (spec.depth < 0) throw domain_error("linearizer depth must be non-negative");
    if (auto cap = spec.rescale.max_depth(); cap && spec.depth > *cap)
        throw domain_error("linearizer depth beyond the rescale list");
    const PointN image = spec.map.eval(spec.fixed_point);
    if ((image - spec.fixed_point).norm() >
        kFixedPointTol * (1.0 + spec.fixed_point.norm()))
        throw domain_error("linearizer: x0 is not a fixed point of the map");
}

bool out_of_range(const PointN& p) {
    return !finite(p) || p.norm() > kOrbitCap;
}

}  // namespace

PointN linearizer_approx(const LinearizerApprox& spec, const PointN& x) {
    validate_spec(spec);
    if (x.size() != spec.map.dim) throw domain_error("linearizer: bad input dimension");
    if (x.norm() > spec.domain_radius * (1.0 + 1e-12))
        throw domain_error("linearizer: |x| exceeds the configured domain radius");
    if (x.isZero(0.0)) return spec.fixed_point;

    const double rho = spec.rescale.rho(spec.depth);
    const bool anchored = spec.map.anchored_at_fixed_point(spec.fixed_point, kFixedPointTol);
    if (anchored) {
        PointN dev = rho * x;
        for (int t = 1; t <= spec.depth; ++t) {
            PointN next = spec.map.eval_deviation(dev);
            if (out_of_range(next)) throw orbit_truncation(spec.fixed_point + dev, t);
            dev = std::move(next);
        }
        return spec.fixed_point + dev;
    }
    PointN y = spec.fixed_point + rho * x;
    for (int t = 1; t <= spec.depth; ++t) {
        PointN next = spec.map.eval(y);
        if (out_of_range(next)) throw orbit_truncation(y, t);
        y = std::move(next);
    }
    return y;
}

PointN generalized_derivative_approx(const MapHandle& f, const PointN& x0, double rho,
                                     const PointN& x) {
    if (!(rho > 0.0)) throw domain_error("generalized derivative: rho must be positive");
    const PointN fx0 = f.eval(x0);
    if ((fx0 - x0).norm() > kFixedPointTol * (1.0 + x0.norm()))
        throw domain_error("generalized derivative: x0 is not a fixed point");
    if (f.anchored_at_fixed_point(x0, kFixedPointTol)) return f.eval_deviation(rho * x) / rho;
    return (f.eval(x0 + rho * x) - fx0) / rho;
}

namespace {

using Complex = std::complex<double>;

Complex to_complex(const Eigen::Vector2d& p) { return {p[0], p[1]}; }
Eigen::Vector2d to_pair(Complex z) { return {z.real(), z.imag()}; }

Complex horner(const std::vector<Complex>& coeffs, Complex z) {
    Complex acc(0.0, 0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

// Taylor coefficients of p at z0 by repeated synthetic division.
std::vector<Complex> shift_coefficients(std::vector<Complex> c, Complex z0) {
    const int deg = static_cast<int>(c.size()) - 1;
    for (int i = 0; i < deg; ++i)
        for (int j = deg - 1; j >= i; --j) c[static_cast<std::size_t>(j)] += z0 * c[static_cast<std::size_t>(j) + 1];
    return c;
}

}  // namespace

Eigen::Vector2d koenigs_polynomial(const std::vector<Eigen::Vector2d>& coeffs,
                                   const Eigen::Vector2d& z0_pair, int k,
                                   const Eigen::Vector2d& z_pair) {
    if (coeffs.size() < 2) throw domain_error("koenigs: polynomial must have degree >= 1");
    if (k < 0) throw domain_error("koenigs: depth must be non-negative");
    std::vector<Complex> c;
    c.reserve(coeffs.size());
    for (const auto& p : coeffs) c.push_back(to_complex(p));
    const Complex z0 = to_complex(z0_pair);
    const Complex z = to_complex(z_pair);

    std::vector<Complex> derivative;
    for (std::size_t j = 1; j < c.size(); ++j)
        derivative.push_back(static_cast<double>(j) * c[j]);
    const Complex lambda = horner(derivative, z0);
    if (!(std::abs(lambda) > 1.0))
        throw domain_error("koenigs: fixed point multiplier must be repelling (|p'(z0)| > 1)");
    if (std::abs(horner(c, z0) - z0) > 1e-12 * (1.0 + std::abs(z0)))
        throw domain_error("koenigs: z0 is not a fixed point of p");
    if (z == Complex(0.0, 0.0)) return z0_pair;

    // deviation form: phi(d) = p(z0 + d) - z0, exact polynomial arithmetic
    std::vector<Complex> shifted = shift_coefficients(c, z0);
    shifted[0] -= z0;

    Complex lambda_k(1.0, 0.0);
    for (int t = 0; t < k; ++t) lambda_k *= lambda;
    Complex dev = z / lambda_k;
    for (int t = 1; t <= k; ++t) {
        dev = horner(shifted, dev);
        if (!std::isfinite(std::abs(dev)) || std::abs(dev) > kOrbitCap)
            throw orbit_truncation(to_pair(z0 + dev), t);
    }
    return to_pair(z0 + dev);
}

namespace {

std::vector<Complex> to_complex_coeffs(const std::vector<Eigen::Vector2d>& coeffs) {
    if (coeffs.empty()) throw domain_error("polynomial needs at least one coefficient");
    std::vector<Complex> c;
    c.reserve(coeffs.size());
    for (const auto& p : coeffs) c.push_back(to_complex(p));
    return c;
}

}  // namespace

MapHandle make_polynomial_map(const std::vector<Eigen::Vector2d>& coeffs) {
    const auto c = to_complex_coeffs(coeffs);
    MapHandle h;
    h.dim = 2;
    h.label = "polynomial";
    h.eval = [c](const PointN& z) -> PointN {
        return to_pair(horner(c, Complex(z[0], z[1])));
    };
    return h;
}

MapHandle make_polynomial_map(const std::vector<Eigen::Vector2d>& coeffs,
                              const Eigen::Vector2d& anchor) {
    MapHandle h = make_polynomial_map(coeffs);
    const Complex z0 = to_complex(anchor);
    std::vector<Complex> shifted = shift_coefficients(to_complex_coeffs(coeffs), z0);
    shifted[0] -= z0;  // deviation relative to the anchor itself
    h.anchor = anchor;
    h.anchor_image = anchor;
    h.eval_deviation = [shifted](const PointN& d) -> PointN {
        return to_pair(horner(shifted, Complex(d[0], d[1])));
    };
    return h;
}

Similarity Similarity::scaling(double s) {
    if (s == 0.0 || !std::isfinite(s)) throw domain_error("similarity scale must be finite and nonzero");
    Similarity psi;
    psi.scalar_ = s;
    return psi;
}

Similarity Similarity::linear(Mat a) {
    if (a.rows() != a.cols() || a.rows() < 1) throw domain_error("similarity matrix must be square");
    Similarity psi;
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw domain_error("similarity matrix must be invertible");
    psi.mat_inverse_ = lu.inverse();
    psi.mat_ = std::move(a);
    return psi;
}

PointN Similarity::apply(const PointN& x, int power) const {
    if (scalar_) return std::pow(*scalar_, power) * x;
    if (x.size() != mat_.rows()) throw domain_error("similarity: dimension mismatch");
    PointN y = x;
    const Mat& step = (power >= 0) ? mat_ : mat_inverse_;
    for (int t = 0; t < std::abs(power); ++t) y = step * y;
    return y;
}

double functional_equation_residual(const MapHandle& L, const MapHandle& f,
                                    const Similarity& psi, const std::vector<PointN>& grid) {
    if (grid.empty()) throw domain_error("functional_equation_residual: empty grid");
    double worst = 0.0;
    for (const PointN& x : grid) {
        const PointN via_map = f.eval(L.eval(x));
        const PointN via_psi = L.eval(psi.apply(x));
        worst = std::max(worst, (via_map - via_psi).norm() / (1.0 + via_psi.norm()));
    }
    return worst;
}

MapHandle make_map(const LinearizerApprox& spec) {
    MapHandle h;
    h.dim = spec.map.dim;
    h.label = spec.map.label + "_approx_k" + std::to_string(spec.depth);
    h.eval = [spec](const PointN& x) { return linearizer_approx(spec, x); };
    return h;
}

namespace {

struct PointwiseConjugacy {
    MapHandle L, M;
    NewtonOptions newton;

    // Approximant linearizers are covering maps away from 0, so L(g) = y
    // has a whole fiber of solutions; the seed selects the branch that is
    // continuous from G(0) = 0.
    PointN forward_seeded(const PointN& x, const PointN& seed) const {
        const PointN target = M.eval(x);
        if (L.eval_inverse) return L.eval_inverse(target);
        auto g = newton_invert(L.eval, target, seed, newton);
        if (!g) throw analysis_error("conjugacy: Newton inversion of L failed");
        return *g;
    }

    PointN forward(const PointN& x) const { return forward_seeded(x, x); }

    PointN backward(const PointN& y) const {
        const PointN target = L.eval(y);
        if (M.eval_inverse) return M.eval_inverse(target);
        auto g = newton_invert(M.eval, target, y, newton);
        if (!g) throw analysis_error("conjugacy: Newton inversion of M failed");
        return *g;
    }
};

}  // namespace

MapHandle conjugacy_map(const MapHandle& L, const MapHandle& M, const NewtonOptions& newton) {
    if (L.dim != M.dim) throw domain_error("conjugacy: linearizers have different dimensions");
    auto pw = std::make_shared<PointwiseConjugacy>(PointwiseConjugacy{L, M, newton});
    MapHandle h;
    h.dim = L.dim;
    h.label = "conjugacy";
    h.eval = [pw](const PointN& x) { return pw->forward(x); };
    h.eval_inverse = [pw](const PointN& y) { return pw->backward(y); };
    return h;
}

ConjugacyEstimate conjugacy_estimate(const LinearizerApprox& L, const LinearizerApprox& M,
                                     const Similarity& psi_L, const Similarity& psi_M,
                                     int extension_depth, const ConjugacyOptions& opts) {
    if (extension_depth < 0) throw domain_error("conjugacy: extension depth must be >= 0");
    if (L.map.dim != M.map.dim)
        throw domain_error("conjugacy: linearizers have different dimensions");
    if ((L.fixed_point - M.fixed_point).norm() > kFixedPointTol * (1.0 + L.fixed_point.norm()))
        throw domain_error("conjugacy: linearizers must share the fixed point");

    // Newton iterates and conjugacy values roam beyond the sampling
    // radius; widen the evaluation domain accordingly.
    LinearizerApprox L_wide = L, M_wide = M;
    double reach = 4.0;
    for (double r : opts.sample_radii) reach = std::max(reach, 4.0 * r);
    L_wide.domain_radius = std::max(L.domain_radius, reach);
    M_wide.domain_radius = std::max(M.domain_radius, reach);
    const PointwiseConjugacy pw{make_map(L_wide), make_map(M_wide), opts.newton};
    const int dim = L.map.dim;

    ConjugacyEstimate est;
    const std::vector<PointN> directions = stencil_directions(dim);
    std::vector<double> radii = opts.sample_radii;
    std::sort(radii.begin(), radii.end());
    // ascend in radius per direction, seeding each solve with the scaled
    // previous solution: continuation keeps Newton on the branch of the
    // covering that passes through G(0) = 0
    for (const PointN& dir : directions) {
        PointN seed;
        double seed_radius = 0.0;
        for (double radius : radii) {
            const PointN x = radius * dir;
            ++est.attempted;
            try {
                const PointN start = (seed_radius > 0.0) ? PointN(seed * (radius / seed_radius))
                                                         : x;
                const PointN g = pw.forward_seeded(x, start);
                est.samples.emplace_back(x, g);
                seed = g;
                seed_radius = radius;
            } catch (const error&) {
                ++est.dropped;
            }
        }
    }
    if (static_cast<double>(est.samples.size()) <
        opts.min_success_fraction * static_cast<double>(est.attempted))
        throw analysis_error("conjugacy estimate failed: too many dropped samples");

    double dot = 0.0, norm2 = 0.0;
    Mat cross = Mat::Zero(dim, dim), gram = Mat::Zero(dim, dim);
    for (const auto& [x, g] : est.samples) {
        dot += x.dot(g);
        norm2 += x.squaredNorm();
        cross += g * x.transpose();
        gram += x * x.transpose();
    }
    est.scalar_fit = dot / norm2;
    est.linear_fit = cross * gram.inverse();
    for (const auto& [x, g] : est.samples) {
        est.scalar_residual = std::max(est.scalar_residual, (g - est.scalar_fit * x).norm());
        est.linear_residual = std::max(est.linear_residual, (g - est.linear_fit * x).norm());
    }

    // Dilatation of the extension G = psi_L^e o G o psi_M^{-e} at each depth.
    const double mid_radius = radii[radii.size() / 2];
    const double fit = est.scalar_fit;
    for (int e = 0; e <= extension_depth; ++e) {
        auto extended = [&](const PointN& p) {
            const PointN q = psi_M.apply(p, -e);
            return psi_L.apply(pw.forward_seeded(q, fit * q), e);
        };
        double worst = 1.0;
        for (const PointN& dir : directions) {
            const PointN xi = psi_M.apply(mid_radius * dir, e);
            try {
                const Mat jac =
                    fd_jacobian(extended, xi, opts.dilatation_fd_step * std::max(1.0, xi.norm()));
                worst = std::max(worst, linmap::singular_dilatation(jac).max_dilatation);
            } catch (const error&) {
                ++est.dropped;
            }
        }
        est.dilatation_by_depth.push_back(worst);
    }
    return est;
}

double commutation_defect(const Mat& g0, const Mat& a) {
    if (g0.rows() != a.rows() || g0.cols() != a.cols() || g0.rows() != g0.cols())
        throw domain_error("commutation_defect: matrices must be square and same size");
    return linmap::operator_norm(g0 * a - a * g0);
}

TransferResult automorphy_transfer_check(const MapHandle& L, const MapHandle& G,
                                         const std::vector<zorich::IsometryElement>& gens,
                                         const std::vector<PointN>& grid,
                                         const NewtonOptions& newton) {
    if (grid.empty()) throw domain_error("automorphy_transfer_check: empty grid");
    TransferResult result;
    for (const PointN& x : grid) {
        ++result.attempted;
        PointN u;
        try {
            if (G.eval_inverse) {
                u = G.eval_inverse(x);
            } else {
                auto inv = newton_invert(G.eval, x, x, newton);
                if (!inv) throw analysis_error("automorphy: inversion failed");
                u = *inv;
            }
            const PointN base = L.eval(x);
            for (const auto& gamma : gens) {
                const PointN moved = L.eval(G.eval(gamma.apply(u)));
                result.residual = std::max(result.residual, (moved - base).norm());
            }
        } catch (const error&) {
            ++result.dropped;
            continue;
        }
    }
    return result;
}

std::vector<PointN> stencil_directions(int dim) {
    if (dim < 1) throw domain_error("stencil_directions: dimension must be positive");
    std::vector<PointN> dirs;
    for (int i = 0; i < dim; ++i) {
        for (double sign : {1.0, -1.0}) {
            PointN e = PointN::Zero(dim);
            e[i] = sign;
            dirs.push_back(e);
        }
    }
    if (dim <= 4) {
        const int combos = 1 << dim;
        for (int mask = 0; mask < combos; ++mask) {
            PointN d(dim);
            for (int i = 0; i < dim; ++i) d[i] = ((mask >> i) & 1) ? -1.0 : 1.0;
            dirs.push_back(d / d.norm());
        }
    }
    if (dim == 3) {
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for (double sa : {1.0, -1.0})
                    for (double sb : {1.0, -1.0}) {
                        PointN d = PointN::Zero(3);
                        d[a] = sa;
                        d[b] = sb;
                        dirs.push_back(d / d.norm());
                    }
    }
    return dirs;
}

}  // namespace qrdyn::linearizer
