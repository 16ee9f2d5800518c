#pragma once

#include "qrdyn/errors.hpp"
#include "qrdyn/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qrdyn::linmap {

// Outer/inner distortion of an invertible linear map, from its singular
// values: outer = sigma_max^n / |det|, inner = |det| / sigma_min^n. Both
// are >= 1 because |det| is the product of the singular values.
struct DilatationReport {
    double outer = 1.0;
    double inner = 1.0;
    double max_dilatation = 1.0;
};

DilatationReport singular_dilatation(const Mat& a);

// K(A^m) for m = 1..m_max by explicit matrix powers. When the entries of
// A^m leave the floating range the profile stops early and `truncated_at`
// holds the first power that was not computed.
struct DilatationProfile {
    std::vector<DilatationReport> reports;
    std::optional<int> truncated_at;
};

DilatationProfile power_dilatation_profile(const Mat& a, int m_max);

enum class UqcVerdict { uniformly_qc, not_uqc_moduli, not_uqc_jordan };

std::string to_string(UqcVerdict verdict);

// Certificate for the linear-map uniform-quasiconformality test: a linear
// map is uniformly quasiconformal iff all eigenvalues share one modulus
// and the map is diagonalizable over C. Diagonalizability is decided from
// the conditioning of the eigenvector matrix, cross-checked against the
// boundedness of the K(A^m) growth profile; an explicit Jordan form is
// never computed.
struct UqcCertificate {
    std::vector<double> eigen_moduli;
    double moduli_spread = 0.0;       // max/min - 1
    bool diagonalizable = true;
    double eigenvector_condition = 1.0;
    std::vector<double> growth_profile;   // K(A^m), m = 1..M
    std::optional<int> profile_truncated_at;
    UqcVerdict verdict = UqcVerdict::uniformly_qc;
};

inline constexpr double kDefaultUqcTol = 1e-8;
inline constexpr int kDefaultProfileDepth = 40;

UqcCertificate uqc_verdict(const Mat& a, double tol = kDefaultUqcTol,
                           int profile_depth = kDefaultProfileDepth);

// Profile-only classification: the two not-uqc modes cannot be told
// apart without eigen-data, so an unbounded profile reports
// not_uqc_moduli.
UqcVerdict profile_only_verdict(const std::vector<double>& growth_profile);

// Thrown when the eigensolver does not converge; carries the
// profile-only fallback verdict.
class eigensolver_error : public analysis_error {
public:
    eigensolver_error(const std::string& msg, UqcVerdict fallback)
        : analysis_error(msg), fallback_(fallback) {}
    UqcVerdict fallback_verdict() const { return fallback_; }

private:
    UqcVerdict fallback_;
};

// True iff A is uniformly quasiconformal and min |eigenvalue| > 1 + tol,
// so every nonzero orbit escapes to infinity.
bool is_loxodromic_repelling(const Mat& a, double tol = kDefaultUqcTol);

// Operator norm (largest singular value).
double operator_norm(const Mat& a);

// Max-row-sum norm. Diagnostic only; equivalent to the operator norm up
// to a dimensional constant.
double inf_norm(const Mat& a);

inline constexpr double kEntryOverflow = 1e300;
inline constexpr double kDetFloor = 1e-300;

}  // namespace qrdyn::linmap
