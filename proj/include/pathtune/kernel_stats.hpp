#pragma once

#include <cstdint>
#include <limits>
#include <set>

#include "pathtune/signature.hpp"

namespace pathtune {

// Single-pass (Welford) accumulator for one kernel signature.
// Invariants: count==0 => mean==m2==0; m2 >= 0; m2/(count-1) is the
// unbiased sample variance for count >= 2.
struct KernelProfile {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double total = 0.0;

  double variance() const { return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stddev() const;
};

// Critical-path state of one kernel on one rank: how often it has occurred
// along the current sub-critical path and whether execution has been
// switched off. freq is adopted wholesale from whichever path dominates;
// is_predictable and propagated_channels stay local.
struct PathKernelRecord {
  KernelSignature key;
  std::uint64_t freq = 0;
  bool is_predictable = false;
  std::set<std::uint64_t> propagated_channels;
};

enum class PolicyKind { eager, online, local, apriori, conditional };

const char* to_string(PolicyKind p);
PolicyKind policy_from_string(const std::string& name);  // throws ConfigError

struct ConfidenceConfig {
  double tolerance = 0.5;      // epsilon, relative half-width threshold
  double z_value = 1.959964;   // 95% normal quantile
  std::uint64_t min_samples = 2;
};

constexpr double kNotAssessable = std::numeric_limits<double>::infinity();

// Record one execution-time sample. Rejects negative or non-finite t with
// MeasurementError.
void record_sample(KernelProfile& profile, double t);

// Relative confidence-interval half-width z*s/(mean*sqrt(count*freq)).
// Returns +inf when count < min_samples or mean <= 0 (not yet assessable).
// freq == 0 is a contract violation.
double relative_ci(const KernelProfile& profile, std::uint64_t freq, const ConfidenceConfig& cfg);

// Whether the kernel's time is predictable to the configured tolerance.
// Count-propagating policies scale the interval by sqrt(freq); conditional
// execution uses freq=1. Sticky: once the record is flagged the answer
// stays true until an explicit reset.
bool is_predictable(const KernelProfile& profile, const PathKernelRecord& record,
                    const ConfidenceConfig& cfg, PolicyKind policy);

// Profile of the concatenation of the two sample streams (parallel merge).
KernelProfile merge_profiles(const KernelProfile& a, const KernelProfile& b);

}  // namespace pathtune
