#include "qrdyn/infspace.hpp"

#include "qrdyn/errors.hpp"
#include "qrdyn/rng.hpp"
#include "qrdyn/zorich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace qrdyn::infspace {

namespace {
constexpr double kEuler = 2.718281828459045235360287471352662498;
}

Eigen::Vector2d radial_stretch(const Eigen::Vector2d& x) {
    const double ninf = std::max(std::abs(x[0]), std::abs(x[1]));
    if (ninf == 0.0) return {0.0, 0.0};
    const double n2 = std::hypot(x[0], x[1]);
    const double factor = n2 / ninf;
    Eigen::Vector2d s;
    for (int i = 0; i < 2; ++i)
        s[i] = (std::abs(x[i]) == ninf) ? std::copysign(n2, x[i]) : x[i] * factor;
    return s;
}

double model_constant() { return std::cbrt(kPi * kEuler / 4.0); }

Point3 homogeneous_model(const Point3& x) {
    static const double c = model_constant();
    const Eigen::Vector2d s = radial_stretch({x[0], x[1]});
    return {c * s[0], c * s[1], c * x[2] / kEuler};
}

MapHandle make_model_map() {
    MapHandle h;
    h.dim = 3;
    h.label = "model_g";
    h.eval = [](const PointN& x) -> PointN { return homogeneous_model(Point3(x)); };
    h.anchor = Point3::Zero();
    h.eval_deviation = h.eval;
    return h;
}

double homogeneity_defect(const MapHandle& f, double r, const PointN& x) {
    if (!(r > 0.0)) throw domain_error("homogeneity_defect: r must be positive");
    return (f.eval(r * x) - r * f.eval(x)).norm();
}

double unit_ball_volume(int n) {
    if (n < 1) throw domain_error("unit_ball_volume: dimension must be positive");
    if (n == 3) return 4.0 * kPi / 3.0;
    return std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

namespace {

constexpr std::int64_t kChunkSize = 65536;

struct ChunkStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t used = 0;
    std::int64_t dropped = 0;
};

ChunkStats volume_chunk(const MapHandle& f, const PointN& x0, double rho,
                        std::int64_t count, std::uint64_t seed, std::uint64_t chunk_index,
                        double fd_step) {
    ChunkStats stats;
    SplitMix64 rng(mix_seed(seed, chunk_index));
    const int n = static_cast<int>(x0.size());
    for (std::int64_t s = 0; s < count; ++s) {
        const PointN z = sample_unit_ball(rng, n);
        const PointN x = x0 + rho * z;
        double jac;
        try {
            jac = std::abs(fd_jacobian_determinant(f.eval, x, fd_step));
        } catch (const error&) {
            ++stats.dropped;
            continue;
        }
        if (!std::isfinite(jac)) {
            ++stats.dropped;
            continue;
        }
        stats.sum += jac;
        stats.sum_sq += jac * jac;
        ++stats.used;
    }
    return stats;
}

}  // namespace

VolumeEstimate monte_carlo_image_volume(const MapHandle& f, const PointN& x0, double rho,
                                        std::int64_t n_samples, std::uint64_t seed,
                                        unsigned workers) {
    if (!(rho > 0.0)) throw domain_error("monte_carlo_image_volume: rho must be positive");
    if (n_samples < 1) throw domain_error("monte_carlo_image_volume: need at least one sample");
    if (f.dim != x0.size()) throw domain_error("monte_carlo_image_volume: dimension mismatch");

    const double fd_step = 1e-3 * rho;
    const std::int64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
    std::vector<ChunkStats> per_chunk(static_cast<std::size_t>(n_chunks));

    if (workers == 0) workers = std::thread::hardware_concurrency();
    workers = std::max(1u, std::min(workers, static_cast<unsigned>(n_chunks)));
    auto run_range = [&](unsigned worker) {
        for (std::int64_t c = worker; c < n_chunks; c += workers) {
            const std::int64_t count =
                std::min(kChunkSize, n_samples - c * kChunkSize);
            per_chunk[static_cast<std::size_t>(c)] =
                volume_chunk(f, x0, rho, count, seed, static_cast<std::uint64_t>(c), fd_step);
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& t : pool) t.join();
    }

    // reduce in chunk order: bitwise independent of the worker count
    ChunkStats total;
    for (const ChunkStats& s : per_chunk) {
        total.sum += s.sum;
        total.sum_sq += s.sum_sq;
        total.used += s.used;
        total.dropped += s.dropped;
    }
    if (total.used == 0) throw analysis_error("monte_carlo_image_volume: all samples dropped");

    const int n = static_cast<int>(x0.size());
    const double ball = unit_ball_volume(n) * std::pow(rho, n);
    const double mean = total.sum / static_cast<double>(total.used);
    const double var =
        std::max(0.0, total.sum_sq / static_cast<double>(total.used) - mean * mean);

    VolumeEstimate est;
    est.mean_abs_jacobian = mean;
    est.mean_standard_error = std::sqrt(var / static_cast<double>(total.used));
    est.volume = mean * ball;
    est.standard_error = ball * est.mean_standard_error;
    est.samples_used = total.used;
    est.dropped = total.dropped;
    return est;
}

MeanRadiusEstimate mean_radius(const MapHandle& f, const PointN& x0, double rho,
                               std::int64_t n_samples, std::uint64_t seed) {
    const VolumeEstimate vol = monte_carlo_image_volume(f, x0, rho, n_samples, seed);
    const int n = static_cast<int>(x0.size());

    MeanRadiusEstimate est;
    est.rho = rho;
    est.samples_used = vol.samples_used;
    est.dropped = vol.dropped;
    // (|f(B)| / Omega_n)^(1/n) = rho * mean^(1/n), with the ball factors
    // cancelled symbolically so the identity map returns rho exactly
    const double mean = vol.mean_abs_jacobian;
    est.value = rho * ((n == 3) ? std::cbrt(mean) : std::pow(mean, 1.0 / n));
    // delta method: d(value)/d(mean) = value / (n * mean)
    est.standard_error =
        (mean > 0.0) ? est.value * vol.mean_standard_error / (n * mean) : 0.0;
    return est;
}

PointN rescaled_map(const MapHandle& f, const PointN& x0, double rho, const PointN& x,
                    std::int64_t mc_samples, std::uint64_t seed) {
    if (!(rho > 0.0)) throw domain_error("rescaled_map: rho must be positive");
    const double mr = mean_radius(f, x0, rho, mc_samples, seed).value;
    if (!(mr > 0.0)) throw analysis_error("rescaled_map: mean radius vanished");
    if (f.has_anchor() && (f.anchor - x0).norm() <= 1e-12 * (1.0 + x0.norm()))
        return f.eval_deviation(rho * x) / mr;
    return (f.eval(x0 + rho * x) - f.eval(x0)) / mr;
}

double l1_family_check(double r, const powermap::PowerMapParams& params,
                       const std::vector<Point3>& grid) {
    if (!(r > 0.0)) throw domain_error("l1_family_check: r must be positive");
    powermap::validate(params);
    if (grid.empty()) throw domain_error("l1_family_check: empty grid");
    const int factor = params.similarity_factor();
    double worst = 0.0;
    for (const Point3& x : grid) {
        try {
            const Point3 candidate = zorich::zorich_eval(homogeneous_model(r * x));
            const Point3 via_map = powermap::power_eval(candidate, params);
            const Point3 via_family =
                zorich::zorich_eval(homogeneous_model(r * factor * x));
            worst = std::max(worst,
                             (via_map - via_family).norm() / (1.0 + via_family.norm()));
        } catch (const overflow_error&) {
            continue;  // grid points beyond the exponential range are skipped
        }
    }
    return worst;
}

double shape_defect_against(const linearizer::RescaleSequence& rho_seq,
                            const std::vector<Point3>& grid,
                            const std::function<Point3(const Point3&)>& reference,
                            int depth) {
    if (grid.empty()) throw domain_error("shape_defect: empty grid");
    if (depth < 1) throw domain_error("shape_defect: depth must be >= 1");
    if (auto cap = rho_seq.max_depth()) depth = std::min(depth, *cap);

    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= depth; ++k) {
        const double rho = rho_seq.rho(k);
        std::vector<Point3> rescaled, targets;
        rescaled.reserve(grid.size());
        double dot = 0.0, norm2 = 0.0;
        for (const Point3& x : grid) {
            const Point3 m = zorich::deviation_invert(rho * x);
            const Point3 t = reference(x);
            dot += m.dot(t);
            norm2 += m.squaredNorm();
            rescaled.push_back(m);
            targets.push_back(t);
        }
        const double c = dot / norm2;  // least-squares scalar fit
        double defect = 0.0;
        for (std::size_t i = 0; i < rescaled.size(); ++i)
            defect = std::max(defect, (c * rescaled[i] - targets[i]).norm());
        best = std::min(best, defect);
    }
    return best;
}

double non_identity_shape_defect(const linearizer::RescaleSequence& rho_seq,
                                 const std::vector<Point3>& grid, int depth) {
    return shape_defect_against(rho_seq, grid, [](const Point3& x) { return x; }, depth);
}

std::vector<Point3> fibonacci_sphere(int count) {
    if (count < 1) throw domain_error("fibonacci_sphere: count must be positive");
    std::vector<Point3> points;
    points.reserve(static_cast<std::size_t>(count));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * i;
        points.emplace_back(r * std::cos(phi), y, r * std::sin(phi));
    }
    return points;
}

std::vector<Point3> default_sphere_grid() {
    std::vector<Point3> grid;
    for (const PointN& d : linearizer::stencil_directions(3)) grid.emplace_back(Point3(d));
    for (const Point3& p : fibonacci_sphere(32)) grid.push_back(p);
    return grid;
}

}  // namespace qrdyn::infspace
