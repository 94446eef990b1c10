#include "pathtune/kernel_stats.hpp"

#include <cmath>
#include <stdexcept>

#include "pathtune/errors.hpp"

namespace pathtune {

double KernelProfile::stddev() const {
  return std::sqrt(variance());
}

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::eager: return "eager";
    case PolicyKind::online: return "online";
    case PolicyKind::local: return "local";
    case PolicyKind::apriori: return "apriori";
    case PolicyKind::conditional: return "conditional";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "eager") return PolicyKind::eager;
  if (name == "online") return PolicyKind::online;
  if (name == "local") return PolicyKind::local;
  if (name == "apriori") return PolicyKind::apriori;
  if (name == "conditional") return PolicyKind::conditional;
  throw ConfigError("unknown policy: " + name);
}

void record_sample(KernelProfile& profile, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw MeasurementError("kernel time sample must be finite and nonnegative");
  }
  profile.count += 1;
  const double delta = t - profile.mean;
  profile.mean += delta / static_cast<double>(profile.count);
  profile.m2 += delta * (t - profile.mean);
  profile.total += t;
}

double relative_ci(const KernelProfile& profile, std::uint64_t freq,
                   const ConfidenceConfig& cfg) {
  if (freq == 0) throw std::invalid_argument("relative_ci: freq must be >= 1");
  if (profile.count < cfg.min_samples || profile.mean <= 0.0) return kNotAssessable;
  const double s = profile.stddev();
  const double k = static_cast<double>(profile.count);
  const double f = static_cast<double>(freq);
  return cfg.z_value * s / (profile.mean * std::sqrt(k) * std::sqrt(f));
}

bool is_predictable(const KernelProfile& profile, const PathKernelRecord& record,
                    const ConfidenceConfig& cfg, PolicyKind policy) {
  if (record.is_predictable) return true;
  const std::uint64_t f_eff =
      policy == PolicyKind::conditional ? 1 : (record.freq > 0 ? record.freq : 1);
  return relative_ci(profile, f_eff, cfg) <= cfg.tolerance;
}

KernelProfile merge_profiles(const KernelProfile& a, const KernelProfile& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  KernelProfile out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  const double delta = b.mean - a.mean;
  out.mean = a.mean + delta * nb / n;
  out.m2 = a.m2 + b.m2 + delta * delta * na * nb / n;
  out.total = a.total + b.total;
  return out;
}

}  // namespace pathtune
