#include "singint/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "singint/parallel.hpp"

namespace singint {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FieldUnbounded: return "FieldUnbounded";
    case ErrorCode::ConditionHrViolated: return "ConditionHrViolated";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::OutsideTube: return "OutsideTube";
    case ErrorCode::FrameConstructionFailed: return "FrameConstructionFailed";
    case ErrorCode::SlabTooWide: return "SlabTooWide";
    case ErrorCode::NonIntegrableProfile: return "NonIntegrableProfile";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::NuOutOfRange: return "NuOutOfRange";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::QuadratureNonConvergent: return "QuadratureNonConvergent";
    case ErrorCode::MethodsDisagree: return "MethodsDisagree";
    case ErrorCode::RemainderUnbounded: return "RemainderUnbounded";
    case ErrorCode::NormExponentTooSmall: return "NormExponentTooSmall";
    case ErrorCode::NotCompactlySupported: return "NotCompactlySupported";
    case ErrorCode::SupportTouchesOrigin: return "SupportTouchesOrigin";
    case ErrorCode::PVNonConvergent: return "PVNonConvergent";
    case ErrorCode::DecayInsufficient: return "DecayInsufficient";
    case ErrorCode::ResolutionExceeded: return "ResolutionExceeded";
    case ErrorCode::DegenerateHessian: return "DegenerateHessian";
    case ErrorCode::CriticalPointOnSupportBoundary: return "CriticalPointOnSupportBoundary";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

AmbientPoint::AmbientPoint(std::span<const double> x, std::span<const double> y)
    : d(static_cast<int>(x.size())) {
  if (x.size() != y.size() || d < 1 || d > kMaxHalfDim)
    throw Error(ErrorCode::BadParams, "AmbientPoint needs x and y of equal size 1..4");
  std::copy(x.begin(), x.end(), z.begin());
  std::copy(y.begin(), y.end(), z.begin() + d);
}

double AmbientPoint::norm() const { return singint::norm(coords()); }

const StratumEstimate* IntegralEstimate::stratum(const std::string& id) const {
  for (const auto& s : strata)
    if (s.id == id) return &s;
  return nullptr;
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double delta = o.mean_ - mean_;
  mean_ += delta * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t shard) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
  return Rng(seq);
}

int worker_count() {
  if (const char* env = std::getenv("SINGINT_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_shards(int n_shards, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), n_shards);
  if (workers <= 1) {
    for (int s = 0; s < n_shards; ++s) fn(s);
    return;
  }
  // Exceptions are carried back to the caller; the lowest failing worker wins.
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int s = w; s < n_shards; s += workers) fn(s);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::pair<std::int64_t, std::int64_t> shard_range(std::int64_t n, int n_shards, int shard) {
  const std::int64_t base = n / n_shards;
  const std::int64_t extra = n % n_shards;
  const std::int64_t begin = shard * base + std::min<std::int64_t>(shard, extra);
  const std::int64_t end = begin + base + (shard < extra ? 1 : 0);
  return {begin, end};
}

void uniform_on_sphere(Rng& rng, std::span<double> out) {
  std::normal_distribution<double> normal;
  double r2 = 0.0;
  do {
    r2 = 0.0;
    for (double& v : out) {
      v = normal(rng);
      r2 += v * v;
    }
  } while (r2 == 0.0);
  const double inv = 1.0 / std::sqrt(r2);
  for (double& v : out) v *= inv;
}

}  // namespace singint
