// Copyright (c) 2026, The dpfl Authors
// SPDX-License-Identifier: Apache-2.0

#include "dpfl/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpfl/errors.hpp"
#include "dpfl/matrix.hpp"

namespace dpfl {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

void check_mechanism(double q, double z) {
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("accountant: q must be in (0, 1]");
  if (!(z > 0.0) || !std::isfinite(z)) throw ParameterError("accountant: z must be > 0");
}

}  // namespace

void PrivacyConfig::validate() const {
  if (!(epsilon > 0.0)) throw ParameterError("privacy: epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("privacy: delta must be in (0, 1)");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw ParameterError("privacy: sampling rate must be in (0, 1]");
  }
  if (rounds < 1) throw ParameterError("privacy: rounds must be >= 1");
  if (!(clip_norm > 0.0)) throw ParameterError("privacy: clip norm must be > 0");
  if (!(cohort_small > 0.0)) throw ParameterError("privacy: cohort_small must be > 0");
  if (!(cohort_small <= cohort_large)) {
    throw ParameterError("privacy: cohort_small must not exceed cohort_large");
  }
}

std::vector<std::string> PrivacyConfig::warnings() const {
  std::vector<std::string> out;
  if (population > 0 && delta >= 1.0 / static_cast<double>(population)) {
    out.push_back("delta >= 1/population; the guarantee is weak for this population");
  }
  return out;
}

std::vector<double> default_orders() {
  std::vector<double> orders{1.25, 1.5, 1.75};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

double clip_in_place(std::span<double> v, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ParameterError("clip: S must be > 0");
  const double norm = l2_norm(v);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (double& x : v) x *= factor;
    // Rounding can leave the norm an ulp above S; shrink until it is not.
    const double shrink = 1.0 - std::numeric_limits<double>::epsilon();
    while (l2_norm(v) > clip_norm) {
      for (double& x : v) x *= shrink;
    }
  }
  return norm;
}

std::vector<double> clip_update(std::span<const double> v, double clip_norm) {
  std::vector<double> out(v.begin(), v.end());
  clip_in_place(out, clip_norm);
  return out;
}

std::vector<double> gaussian_noise(std::size_t dim, double sigma, RandomSource& source) {
  return draw_gaussian_vector(source, 0.0, sigma, dim);
}

double rdp_sampled_gaussian_integer(double q, double z, std::size_t order) {
  check_mechanism(q, z);
  if (order < 2) throw ParameterError("accountant: integer order must be >= 2");
  const double alpha = static_cast<double>(order);
  if (q == 1.0) return alpha / (2.0 * z * z);
  // log E[(mu_1/mu_0)^alpha] for the mixture (1-q) N(0, z^2) + q N(1, z^2):
  //   sum_k C(alpha, k) (1-q)^(alpha-k) q^k exp((k^2 - k) / (2 z^2))
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  double log_a = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= order; ++k) {
    const double kd = static_cast<double>(k);
    const double term = log_binomial(order, k) + kd * log_q + (alpha - kd) * log_1mq +
                        (kd * kd - kd) / (2.0 * z * z);
    log_a = log_add(log_a, term);
  }
  return std::max(0.0, log_a / (alpha - 1.0));
}

RdpCurve rdp_of_sampled_gaussian(double q, double z, std::span<const double> orders) {
  check_mechanism(q, z);
  RdpCurve curve;
  curve.orders.assign(orders.begin(), orders.end());
  curve.epsilons.reserve(orders.size());
  for (double alpha : orders) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
      throw ParameterError("accountant: orders must be > 1");
    }
    if (q == 1.0) {
      curve.epsilons.push_back(alpha / (2.0 * z * z));
    } else {
      const auto ceiling = static_cast<std::size_t>(std::ceil(alpha));
      curve.epsilons.push_back(rdp_sampled_gaussian_integer(q, z, std::max<std::size_t>(2, ceiling)));
    }
  }
  return curve;
}

DpGuarantee compose_and_convert(const RdpCurve& one_round, std::size_t rounds, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("accountant: delta must be in (0, 1)");
  if (one_round.orders.size() != one_round.epsilons.size() || one_round.orders.empty()) {
    throw ParameterError("accountant: malformed RDP curve");
  }
  DpGuarantee best{std::numeric_limits<double>::infinity(), 0.0};
  const double log_delta = std::log(delta);
  for (std::size_t i = 0; i < one_round.orders.size(); ++i) {
    const double alpha = one_round.orders[i];
    const double rdp = static_cast<double>(rounds) * one_round.epsilons[i];
    const double eps = rdp + std::log((alpha - 1.0) / alpha) -
                       (std::log(alpha) + log_delta) / (alpha - 1.0);
    if (eps < best.epsilon) best = {eps, alpha};
  }
  best.epsilon = std::max(0.0, best.epsilon);
  return best;
}

DpGuarantee compute_epsilon(double q, double z, std::size_t rounds, double delta,
                            std::span<const double> orders) {
  return compose_and_convert(rdp_of_sampled_gaussian(q, z, orders), rounds, delta);
}

DpGuarantee compute_epsilon(double q, double z, std::size_t rounds, double delta) {
  const auto orders = default_orders();
  return compute_epsilon(q, z, rounds, delta, orders);
}

double calibrate_noise_multiplier(const PrivacyConfig& config) {
  config.validate();
  const auto orders = default_orders();
  auto spent = [&](double z) {
    return compute_epsilon(config.sampling_rate, z, config.rounds, config.delta, orders).epsilon;
  };
  double lo = kMinNoiseMultiplier, hi = kMaxNoiseMultiplier;
  if (spent(lo) <= config.epsilon) return lo;
  if (spent(hi) > config.epsilon) {
    throw CalibrationError("calibration: epsilon=" + std::to_string(config.epsilon) +
                           " is not reachable with z <= " + std::to_string(hi));
  }
  // Invariant: spent(lo) > epsilon >= spent(hi).
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (spent(mid) <= config.epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double effective_sigma(const PrivacyConfig& config, double z) {
  return z * config.clip_norm * (config.cohort_small / config.cohort_large);
}

}  // namespace dpfl
