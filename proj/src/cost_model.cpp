#include "pathtune/cost_model.hpp"

#include <cmath>

#include "pathtune/errors.hpp"

namespace pathtune {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller with a fresh uniform pair per call: no hidden spare state,
  // so draw sequences are reproducible from the rng position alone.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double standard_normal_keyed(std::uint64_t key) {
  std::uint64_t state = key;
  double u1 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

double flops_for(const KernelSignature& sig) {
  const auto& p = sig.params;
  auto dim = [&p](std::size_t i) -> double {
    return i < p.size() ? static_cast<double>(p[i]) : 1.0;
  };
  switch (sig.tag) {
    case RoutineTag::gemm:
      return 2.0 * dim(0) * dim(1) * dim(2);
    case RoutineTag::trmm:
    case RoutineTag::trsm:
      return dim(0) * dim(0) * dim(1);
    case RoutineTag::syrk:
      return dim(0) * dim(0) * dim(1);
    case RoutineTag::potrf:
    case RoutineTag::trtri:
      return dim(0) * dim(0) * dim(0) / 3.0;
    case RoutineTag::geqrf:
      return 2.0 * dim(0) * dim(1) * dim(1);
    case RoutineTag::ormqr:
    case RoutineTag::tpmqrt:
      return 4.0 * dim(0) * dim(1) * dim(2);
    case RoutineTag::tpqrt:
      return 2.0 * dim(0) * dim(1) * dim(1);
    case RoutineTag::custom: {
      double f = 1.0;
      for (std::int64_t v : p) f *= static_cast<double>(v);
      return f;
    }
    default:
      throw UnknownKernelError("no flop rule for " + sig.str());
  }
}

NoiseKind noise_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::none;
  if (name == "gaussian" || name == "gaussian_cv") return NoiseKind::gaussian_cv;
  if (name == "lognormal" || name == "lognormal_cv") return NoiseKind::lognormal_cv;
  throw ConfigError("unknown noise kind: " + name);
}

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::gaussian_cv: return "gaussian_cv";
    case NoiseKind::lognormal_cv: return "lognormal_cv";
  }
  return "?";
}

double GroundTruthModel::mean_cost(const KernelSignature& sig) const {
  if (auto it = mu_override.find(sig); it != mu_override.end()) return it->second;
  if (is_compute_tag(sig.tag)) {
    return gamma_per_flop * flops_for(sig);
  }
  if (is_comm_tag(sig.tag)) {
    const double bytes = sig.params.empty() ? 0.0 : static_cast<double>(sig.params[0]);
    return alpha_latency + beta_per_byte * bytes;
  }
  throw UnknownKernelError("no cost rule for " + sig.str());
}

namespace {

double apply_noise(double mu, NoiseKind noise, double cv, double z) {
  switch (noise) {
    case NoiseKind::none:
      return mu;
    case NoiseKind::gaussian_cv:
      return std::max(mu * (1.0 + cv * z), mu * 1e-3);
    case NoiseKind::lognormal_cv: {
      // sigma chosen so the distribution's CV equals cv; mean stays mu.
      const double sigma = std::sqrt(std::log1p(cv * cv));
      return std::max(mu * std::exp(sigma * z - 0.5 * sigma * sigma), mu * 1e-3);
    }
  }
  return mu;
}

}  // namespace

double GroundTruthModel::sample_cost(const KernelSignature& sig, std::mt19937_64& rng) const {
  const double mu = mean_cost(sig);
  if (noise == NoiseKind::none) return mu;
  return apply_noise(mu, noise, noise_cv, standard_normal(rng));
}

double GroundTruthModel::sample_cost_keyed(const KernelSignature& sig, std::uint64_t key) const {
  const double mu = mean_cost(sig);
  if (noise == NoiseKind::none) return mu;
  return apply_noise(mu, noise, noise_cv, standard_normal_keyed(key));
}

}  // namespace pathtune
