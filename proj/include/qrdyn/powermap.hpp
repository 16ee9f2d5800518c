#pragma once

#include "qrdyn/geometry.hpp"
#include "qrdyn/numerics.hpp"
#include "qrdyn/zorich.hpp"

#include <optional>
#include <vector>

namespace qrdyn::powermap {

// Parameters of the uqr power map P solving P(Z(x)) = Z(m^2 x).
struct PowerMapParams {
    int m = 3;

    int similarity_factor() const { return m * m; }
};

void validate(const PowerMapParams& params);

// P(y) = Z(m^2 Z^{-1}(y)) with the canonical inverse branch: beam (0,0)
// for the closed upper half-space, (1,0) for the open lower half-space.
// Satisfies |P(y)| = |y|^{m^2}.
Point3 power_eval(const Point3& y, const PowerMapParams& params = {});

// Normalized Schroder defect |P(Z(x)) - Z(m^2 x)| / (1 + |Z(m^2 x)|).
double schroder_residual(const Point3& x, const PowerMapParams& params = {});

// Max pairwise distance of Z(m^2 Z^{-1}(y, addr)) over the given inverse
// branches. Vanishes when the similarity d(x) = m^2 x maps the deck group
// of every branch pair into itself (odd m); for even m the point-rotation
// branches disagree by a half-turn of the image.
double branch_consistency(const Point3& y, const PowerMapParams& params,
                          const std::vector<zorich::BeamAddress>& addresses);

struct OrbitResult {
    std::vector<Point3> points;          // y, P(y), ..., up to k applications
    std::optional<int> truncated_at;     // first step that would overflow
};

OrbitResult orbit(const Point3& y, const PowerMapParams& params, int k);

// P as a MapHandle anchored at its repelling fixed point (0,0,1).
MapHandle make_power_map(const PowerMapParams& params = {});

}  // namespace qrdyn::powermap
