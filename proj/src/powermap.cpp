#include "qrdyn/powermap.hpp"

#include "qrdyn/errors.hpp"

#include <cmath>
#include <string>

namespace qrdyn::powermap {

using zorich::BeamAddress;

void validate(const PowerMapParams& params) {
    if (params.m < 2) throw domain_error("power map requires m >= 2");
}

namespace {

BeamAddress canonical_branch(const Point3& y) {
    // plane points resolve to the upper branch (the fold's closure rule)
    return (y[2] < 0.0) ? BeamAddress{1, 0} : BeamAddress{0, 0};
}

void check_power_overflow(double log_modulus, int factor) {
    if (std::abs(log_modulus) * factor > zorich::kWExponentCap)
        throw overflow_error("power map overflow: |y|^(m^2) leaves the floating range");
}

}  // namespace

Point3 power_eval(const Point3& y, const PowerMapParams& params) {
    validate(params);
    const double r = y.norm();
    if (r == 0.0 || !std::isfinite(r))
        throw domain_error("power map is defined on R^3 minus the origin");
    const int factor = params.similarity_factor();
    check_power_overflow(std::log(r), factor);
    const Point3 x = zorich::zorich_invert(y, canonical_branch(y));
    return zorich::zorich_eval(factor * x);
}

double schroder_residual(const Point3& x, const PowerMapParams& params) {
    validate(params);
    const Point3 via_map = power_eval(zorich::zorich_eval(x), params);
    const Point3 via_similarity = zorich::zorich_eval(params.similarity_factor() * x);
    return (via_map - via_similarity).norm() / (1.0 + via_similarity.norm());
}

double branch_consistency(const Point3& y, const PowerMapParams& params,
                          const std::vector<BeamAddress>& addresses) {
    validate(params);
    if (addresses.empty()) throw domain_error("branch_consistency: no addresses given");
    std::vector<Point3> values;
    values.reserve(addresses.size());
    for (const BeamAddress& addr : addresses) {
        const Point3 x = zorich::zorich_invert(y, addr);
        values.push_back(zorich::zorich_eval(params.similarity_factor() * x));
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < values.size(); ++a)
        for (std::size_t b = a + 1; b < values.size(); ++b)
            worst = std::max(worst, (values[a] - values[b]).norm());
    return worst;
}

OrbitResult orbit(const Point3& y, const PowerMapParams& params, int k) {
    validate(params);
    if (k < 0) throw domain_error("orbit length must be non-negative");
    if (y.norm() == 0.0) throw domain_error("orbit start must be nonzero");
    OrbitResult result;
    result.points.push_back(y);
    for (int t = 1; t <= k; ++t) {
        const Point3& current = result.points.back();
        try {
            check_power_overflow(std::log(current.norm()), params.similarity_factor());
            result.points.push_back(power_eval(current, params));
        } catch (const overflow_error&) {
            result.truncated_at = t;
            break;
        }
    }
    return result;
}

namespace {

// P(x0 + d) - x0 at the fixed point x0 = (0,0,1), accurate relative to
// |d|. Small deviations ride the anchored Z / Z^{-1} forms; larger ones
// fall back to the plain composition, which by then has nothing left to
// cancel.
Point3 power_deviation(const Point3& d, const PowerMapParams& params) {
    const Point3 x0(0.0, 0.0, 1.0);
    if (d.norm() > 0.4) return power_eval(x0 + d, params) - x0;
    const Point3 u = zorich::deviation_invert(d);
    const Point3 scaled = params.similarity_factor() * u;
    if (std::max(std::abs(scaled[0]), std::abs(scaled[1])) <= kPi / 2)
        return zorich::deviation_eval(scaled);
    return zorich::zorich_eval(scaled) - x0;
}

}  // namespace

MapHandle make_power_map(const PowerMapParams& params) {
    validate(params);
    MapHandle h;
    h.dim = 3;
    h.label = "power_m" + std::to_string(params.m);
    h.eval = [params](const PointN& y) -> PointN { return power_eval(Point3(y), params); };
    h.anchor = Point3(0.0, 0.0, 1.0);
    h.eval_deviation = [params](const PointN& d) -> PointN {
        return power_deviation(Point3(d), params);
    };
    return h;
}

}  // namespace qrdyn::powermap
