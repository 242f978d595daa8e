#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace singint {

/// Largest half-dimension d supported by the fixed-capacity point types.
inline constexpr int kMaxHalfDim = 4;
inline constexpr int kMaxAmbientDim = 2 * kMaxHalfDim;

enum class ErrorCode {
  FieldUnbounded,
  ConditionHrViolated,
  UnknownField,
  BadParams,
  DegeneratePoint,
  OutsideTube,
  FrameConstructionFailed,
  SlabTooWide,
  NonIntegrableProfile,
  BudgetExhausted,
  NuOutOfRange,
  BoundViolated,
  QuadratureNonConvergent,
  MethodsDisagree,
  RemainderUnbounded,
  NormExponentTooSmall,
  NotCompactlySupported,
  SupportTouchesOrigin,
  PVNonConvergent,
  DecayInsufficient,
  ResolutionExceeded,
  DegenerateHessian,
  CriticalPointOnSupportBoundary,
  ConfigInvalid,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A point z = (x, y) of R^{2d}, stored contiguously so fields can read it as one span.
struct AmbientPoint {
  int d = 0;
  std::array<double, kMaxAmbientDim> z{};

  AmbientPoint() = default;
  explicit AmbientPoint(int half_dim) : d(half_dim) {}
  AmbientPoint(std::span<const double> x, std::span<const double> y);

  std::span<const double> x() const { return {z.data(), static_cast<size_t>(d)}; }
  std::span<const double> y() const { return {z.data() + d, static_cast<size_t>(d)}; }
  std::span<double> x() { return {z.data(), static_cast<size_t>(d)}; }
  std::span<double> y() { return {z.data() + d, static_cast<size_t>(d)}; }
  std::span<const double> coords() const { return {z.data(), static_cast<size_t>(2 * d)}; }
  std::span<double> coords() { return {z.data(), static_cast<size_t>(2 * d)}; }

  double norm() const;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// <z> = sqrt(1 + |z|^2)
inline double japanese_bracket(double r) { return std::sqrt(1.0 + r * r); }

/// Area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Volume of the unit ball in R^n.
inline double ball_volume(int n) { return sphere_area(n) / n; }

struct StratumEstimate {
  std::string id;
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::vector<StratumEstimate> strata;
  bool converged = true;

  const StratumEstimate* stratum(const std::string& id) const;
};

/// Welford accumulator; merge() is Chan's pairwise update so shard reductions are order-fixed.
class RunningStats {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }

  void merge(const RunningStats& o);

  std::int64_t count() const { return n_; }
  double mean() const { return n_ > 0 ? mean_ : 0.0; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  /// Standard error of the mean.
  double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace singint
