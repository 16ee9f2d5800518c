#include "qrdyn/zorich.hpp"

#include "qrdyn/errors.hpp"

#include <cmath>

namespace qrdyn::zorich {

namespace {

constexpr double kSquareSlack = 1e-9;

bool is_pi_multiple(double t) {
    const double q = t / kPi;
    return std::abs(q - std::round(q)) <= 1e-9;
}

// Nearest beam index with wall points (u = i*pi + pi/2) assigned to the
// lower index. Both beams evaluate identically on walls, so the tie rule
// is unobservable; it only pins the reported address.
long beam_index(double coordinate) {
    return static_cast<long>(std::ceil(coordinate / kPi - 0.5));
}

double parity_sign(long index) { return (index % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

IsometryElement::IsometryElement(double fu, double fv, double tu, double tv)
    : flip_u_(fu), flip_v_(fv), t_u_(tu), t_v_(tv) {
    if (!is_pi_multiple(tu) || !is_pi_multiple(tv))
        throw domain_error("isometry translation components must be multiples of pi");
}

IsometryElement IsometryElement::identity() { return {1.0, 1.0, 0.0, 0.0}; }

IsometryElement IsometryElement::translation(double t_u, double t_v) {
    return {1.0, 1.0, t_u, t_v};
}

IsometryElement IsometryElement::point_rotation(double c_u, double c_v) {
    return {-1.0, -1.0, 2.0 * c_u, 2.0 * c_v};
}

IsometryElement IsometryElement::reflection_u(double wall_u) {
    return {-1.0, 1.0, 2.0 * wall_u, 0.0};
}

Point3 IsometryElement::apply(const Point3& x) const {
    return {flip_u_ * x[0] + t_u_, flip_v_ * x[1] + t_v_, x[2]};
}

PointN IsometryElement::apply(const PointN& x) const {
    if (x.size() < 2) throw domain_error("isometry needs at least two coordinates");
    PointN out = x;
    out[0] = flip_u_ * x[0] + t_u_;
    out[1] = flip_v_ * x[1] + t_v_;
    return out;
}

Point3 hemisphere_map(double u, double v) {
    const double m = std::max(std::abs(u), std::abs(v));
    if (m > kPi / 2 + kSquareSlack)
        throw domain_error("hemisphere_map input outside the central square");
    if (m == 0.0) return {0.0, 0.0, 1.0};
    const double r = std::hypot(u, v);
    const double f = std::sin(m) / r;
    return {u * f, v * f, std::cos(m)};
}

Eigen::Vector2d hemisphere_inverse(const Point3& p) {
    const double norm = p.norm();
    if (std::abs(norm - 1.0) > 1e-9)
        throw domain_error("hemisphere_inverse input is not on the unit sphere");
    if (p[2] < -1e-12)
        throw domain_error("hemisphere_inverse input is on the lower hemisphere");
    const double planar = std::hypot(p[0], p[1]);
    if (planar == 0.0) return {0.0, 0.0};
    // atan2 form of arccos(c): well conditioned near the pole.
    const double m = std::atan2(planar, p[2]);
    const double denom = std::max(std::abs(p[0]), std::abs(p[1]));
    return {m * p[0] / denom, m * p[1] / denom};
}

FoldResult fold_to_central(const Point3& x) {
    FoldResult fold;
    fold.address.i = beam_index(x[0]);
    fold.address.j = beam_index(x[1]);
    fold.local = {parity_sign(fold.address.i) * (x[0] - fold.address.i * kPi),
                  parity_sign(fold.address.j) * (x[1] - fold.address.j * kPi), x[2]};
    fold.odd_parity = fold.address.parity() == 1;
    return fold;
}

Point3 unfold(const Point3& local, const BeamAddress& address) {
    return {address.i * kPi + parity_sign(address.i) * local[0],
            address.j * kPi + parity_sign(address.j) * local[1], local[2]};
}

namespace {

Point3 eval_folded(const Point3& local, bool odd_parity) {
    if (std::abs(local[2]) > kWExponentCap)
        throw overflow_error("zorich_eval: |w| exceeds the exponential range");
    Point3 image = std::exp(local[2]) * hemisphere_map(local[0], local[1]);
    if (odd_parity) image[2] = -image[2];
    return image;
}

}  // namespace

Point3 zorich_eval(const Point3& x) {
    const FoldResult fold = fold_to_central(x);
    return eval_folded(fold.local, fold.odd_parity);
}

Point3 eval_in_beam(const Point3& x, const BeamAddress& address) {
    const Point3 local = {parity_sign(address.i) * (x[0] - address.i * kPi),
                          parity_sign(address.j) * (x[1] - address.j * kPi), x[2]};
    return eval_folded(local, address.parity() == 1);
}

Point3 zorich_invert(const Point3& y, const BeamAddress& branch) {
    const double r = y.norm();
    if (r == 0.0 || !std::isfinite(r))
        throw domain_error("zorich_invert: input must be finite and nonzero");

    const Point3 unit = y / r;
    const double c = unit[2];
    const int parity = branch.parity();
    if (c > 0.0 && parity != 0)
        throw branch_error("zorich_invert: upper half-space preimages lie over even beams");
    if (c < 0.0 && parity != 1)
        throw branch_error("zorich_invert: lower half-space preimages lie over odd beams");

    const Eigen::Vector2d uv = hemisphere_inverse({unit[0], unit[1], std::abs(c)});
    return unfold({uv[0], uv[1], std::log(r)}, branch);
}

double invariance_residual(const IsometryElement& g, const std::vector<Point3>& samples) {
    if (samples.empty()) throw domain_error("invariance_residual: empty sample list");
    double worst = 0.0;
    for (const Point3& x : samples)
        worst = std::max(worst, (zorich_eval(g.apply(x)) - zorich_eval(x)).norm());
    return worst;
}

Point3 deviation_eval(const Point3& u) {
    const double m = std::max(std::abs(u[0]), std::abs(u[1]));
    if (m > kPi / 2 + kSquareSlack)
        throw domain_error("deviation_eval input outside the central beam");
    if (std::abs(u[2]) > kWExponentCap)
        throw overflow_error("deviation_eval: |w| exceeds the exponential range");
    const double ew1 = std::expm1(u[2]);
    if (m == 0.0) return {0.0, 0.0, ew1};
    const double r = std::hypot(u[0], u[1]);
    const double f = (1.0 + ew1) * std::sin(m) / r;
    const double half = std::sin(0.5 * m);
    // e^w cos M - 1 split into relative-accuracy pieces
    const double vertical = ew1 * std::cos(m) - 2.0 * half * half;
    return {u[0] * f, u[1] * f, vertical};
}

Point3 deviation_invert(const Point3& d) {
    const double c = 1.0 + d[2];
    if (!(c > 0.0) || d.norm() >= 1.0)
        throw domain_error("deviation_invert: deviation too large for the central branch");
    const double q = 2.0 * d[2] + d.squaredNorm();
    const double w = 0.5 * std::log1p(q);
    const double planar = std::hypot(d[0], d[1]);
    if (planar == 0.0) return {0.0, 0.0, w};
    const double m = std::atan2(planar, c);
    const double denom = std::max(std::abs(d[0]), std::abs(d[1]));
    return {m * d[0] / denom, m * d[1] / denom, w};
}

MapHandle make_zorich_map() {
    MapHandle h;
    h.dim = 3;
    h.label = "zorich";
    h.eval = [](const PointN& x) -> PointN { return zorich_eval(Point3(x)); };
    h.eval_inverse = [](const PointN& y) -> PointN {
        const Point3 p(y);
        const BeamAddress branch = (p[2] < 0.0) ? BeamAddress{1, 0} : BeamAddress{0, 0};
        return zorich_invert(p, branch);
    };
    return h;
}

MapHandle make_zorich_inverse_map(const BeamAddress& branch) {
    MapHandle h;
    h.dim = 3;
    h.label = "zorich_inverse";
    h.eval = [branch](const PointN& y) -> PointN { return zorich_invert(Point3(y), branch); };
    if (branch == BeamAddress{}) {
        h.anchor = Point3(0.0, 0.0, 1.0);
        h.anchor_image = Point3::Zero();
        h.eval_deviation = [](const PointN& d) -> PointN {
            const Point3 dev(d);
            if (dev.norm() < 0.9) return deviation_invert(dev);
            // the anchor image is the origin, so value and deviation agree
            return zorich_invert(Point3(0.0, 0.0, 1.0) + dev, BeamAddress{});
        };
    }
    return h;
}

}  // namespace qrdyn::zorich
