#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "pathtune/signature.hpp"

namespace pathtune {

// Deterministic helpers pinned independently of library internals.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b);
double uniform01(std::mt19937_64& rng);        // in [0,1)
double standard_normal(std::mt19937_64& rng);  // Box-Muller, one fresh pair per draw
double standard_normal_keyed(std::uint64_t key);

// Approximate flop counts used by the cost rule; constants are the usual
// dense linear algebra leading terms.
double flops_for(const KernelSignature& sig);  // throws UnknownKernelError

enum class NoiseKind { none, gaussian_cv, lognormal_cv };

NoiseKind noise_from_string(const std::string& name);  // throws ConfigError
const char* to_string(NoiseKind k);

// True per-signature cost distribution: mean from a BSP-style rule
// (gamma*flops for computation, alpha + beta*bytes for communication),
// multiplicative noise with the configured coefficient of variation.
// Sampled costs are clamped at mean*1e-3 so they stay positive.
struct GroundTruthModel {
  double gamma_per_flop = 1e-9;
  double alpha_latency = 2e-5;
  double beta_per_byte = 5e-10;
  NoiseKind noise = NoiseKind::none;
  double noise_cv = 0.0;
  std::uint64_t seed = 0;
  std::map<KernelSignature, double> mu_override;  // exact means for tests

  // Communication signatures carry [bytes, stride0, size0, ...].
  double mean_cost(const KernelSignature& sig) const;
  double sample_cost(const KernelSignature& sig, std::mt19937_64& rng) const;
  // Counter-keyed variant: the draw is a pure function of (model, sig, key),
  // so runs with equal seeds see equal draws for equal instances no matter
  // which other instances were skipped.
  double sample_cost_keyed(const KernelSignature& sig, std::uint64_t key) const;
};

}  // namespace pathtune
