#include "qrdyn/linmap.hpp"

#include "qrdyn/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace qrdyn::linmap {

namespace {

void require_square(const Mat& a) {
    if (a.rows() < 2 || a.rows() != a.cols())
        throw domain_error("matrix must be square with dimension >= 2");
    if (!finite(a)) throw domain_error("matrix has non-finite entries");
}

// Singular values of A computed on a rescaled copy so that huge entries
// (matrix powers) do not overflow inside the SVD.
struct ScaledSvd {
    double scale;
    Eigen::VectorXd sigma;  // singular values of A/scale, descending
};

ScaledSvd scaled_singular_values(const Mat& a) {
    const double amax = a.cwiseAbs().maxCoeff();
    const double scale = (amax > 0.0) ? amax : 1.0;
    Eigen::JacobiSVD<Mat> svd(a / scale);
    return {scale, svd.singularValues()};
}

}  // namespace

DilatationReport singular_dilatation(const Mat& a) {
    require_square(a);
    const int n = static_cast<int>(a.rows());
    const ScaledSvd svd = scaled_singular_values(a);

    // Work with A/scale throughout: the scale factors cancel in both
    // dilatation ratios, and sigma^n cannot overflow on the way.
    const double det_scaled = std::abs((a / svd.scale).fullPivLu().determinant());
    const double log_det = n * std::log(svd.scale) +
                           (det_scaled > 0.0 ? std::log(det_scaled)
                                             : -std::numeric_limits<double>::infinity());
    if (!(log_det > std::log(kDetFloor)))
        throw domain_error("degenerate map: |det| below floor");

    DilatationReport report;
    report.outer = std::pow(svd.sigma(0), n) / det_scaled;
    report.inner = det_scaled / std::pow(svd.sigma(n - 1), n);
    report.max_dilatation = std::max(report.outer, report.inner);
    return report;
}

DilatationProfile power_dilatation_profile(const Mat& a, int m_max) {
    require_square(a);
    if (m_max < 1) throw domain_error("m_max must be >= 1");
    singular_dilatation(a);  // validates invertibility up front

    DilatationProfile profile;
    Mat power = Mat::Identity(a.rows(), a.cols());
    for (int m = 1; m <= m_max; ++m) {
        power = power * a;
        if (!finite(power) || power.cwiseAbs().maxCoeff() > kEntryOverflow) {
            profile.truncated_at = m;
            break;
        }
        DilatationReport report = singular_dilatation(power);
        if (!std::isfinite(report.max_dilatation)) {
            profile.truncated_at = m;
            break;
        }
        profile.reports.push_back(report);
    }
    return profile;
}

std::string to_string(UqcVerdict verdict) {
    switch (verdict) {
        case UqcVerdict::uniformly_qc: return "uniformly_qc";
        case UqcVerdict::not_uqc_moduli: return "not_uqc_moduli";
        case UqcVerdict::not_uqc_jordan: return "not_uqc_jordan";
    }
    return "unknown";
}

UqcVerdict profile_only_verdict(const std::vector<double>& growth_profile) {
    if (growth_profile.size() < 2) return UqcVerdict::uniformly_qc;
    const double first = growth_profile.front();
    const double last = growth_profile.back();
    return (last > 10.0 * first) ? UqcVerdict::not_uqc_moduli : UqcVerdict::uniformly_qc;
}

UqcCertificate uqc_verdict(const Mat& a, double tol, int profile_depth) {
    require_square(a);
    if (!(tol > 0.0 && tol < 1.0)) throw domain_error("tol must lie in (0,1)");

    UqcCertificate cert;
    DilatationProfile profile = power_dilatation_profile(a, profile_depth);
    cert.profile_truncated_at = profile.truncated_at;
    for (const DilatationReport& r : profile.reports)
        cert.growth_profile.push_back(r.max_dilatation);

    Eigen::EigenSolver<Mat> solver(a);
    if (solver.info() != Eigen::Success) {
        throw eigensolver_error("eigensolver failed to converge",
                                profile_only_verdict(cert.growth_profile));
    }

    const auto values = solver.eigenvalues();
    for (Eigen::Index i = 0; i < values.size(); ++i)
        cert.eigen_moduli.push_back(std::abs(values(i)));
    const auto [lo, hi] = std::minmax_element(cert.eigen_moduli.begin(), cert.eigen_moduli.end());
    cert.moduli_spread = *hi / *lo - 1.0;

    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(solver.eigenvectors());
        const auto& sig = svd.singularValues();
        const double smin = sig(sig.size() - 1);
        cert.eigenvector_condition = (smin > 0.0) ? sig(0) / smin
                                                  : std::numeric_limits<double>::infinity();
    }
    cert.diagonalizable = cert.eigenvector_condition <= 1.0 / tol;

    // A defective eigenvalue of index p is computed with error on the
    // order of (eps |A|)^(1/p), so when the conditioning already signals
    // defectiveness the moduli comparison must not read that splitting
    // as genuinely distinct moduli.
    const int n = static_cast<int>(a.rows());
    const double eps = std::numeric_limits<double>::epsilon();
    const double moduli_tol =
        cert.diagonalizable ? tol : std::max(tol, 100.0 * std::pow(eps, 1.0 / n));
    const bool moduli_equal = cert.moduli_spread <= moduli_tol;

    // Cross-check against the growth profile: a truncated or >10x-growing
    // profile contradicts "diagonalizable with equal moduli", a flat one
    // contradicts a non-diagonalizability call. The profile, being the
    // direct empirical statement of the property, wins.
    const bool profile_unbounded =
        cert.profile_truncated_at.has_value() ||
        (cert.growth_profile.size() >= 2 &&
         cert.growth_profile.back() > 10.0 * cert.growth_profile.front());
    if (moduli_equal && cert.diagonalizable && profile_unbounded)
        cert.diagonalizable = false;
    if (moduli_equal && !cert.diagonalizable && !profile_unbounded &&
        cert.growth_profile.size() >= static_cast<std::size_t>(profile_depth))
        cert.diagonalizable = true;

    if (!moduli_equal)
        cert.verdict = UqcVerdict::not_uqc_moduli;
    else if (!cert.diagonalizable)
        cert.verdict = UqcVerdict::not_uqc_jordan;
    else
        cert.verdict = UqcVerdict::uniformly_qc;
    return cert;
}

bool is_loxodromic_repelling(const Mat& a, double tol) {
    UqcCertificate cert = uqc_verdict(a, tol);
    if (cert.verdict != UqcVerdict::uniformly_qc) return false;
    const double min_modulus =
        *std::min_element(cert.eigen_moduli.begin(), cert.eigen_moduli.end());
    return min_modulus > 1.0 + tol;
}

double operator_norm(const Mat& a) {
    const ScaledSvd svd = scaled_singular_values(a);
    return svd.scale * svd.sigma(0);
}

double inf_norm(const Mat& a) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        best = std::max(best, a.row(i).cwiseAbs().sum());
    return best;
}

}  // namespace qrdyn::linmap
