#include "pricelab/link.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pricelab {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_prime(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

}  // namespace

LinkFunction LinkFunction::identity() {
  LinkFunction f;
  f.kind_ = LinkKind::identity;
  f.g_lower_ = 1.0;
  f.g_upper_ = 1.0;
  f.z_max_ = std::numeric_limits<double>::infinity();
  f.range_in_unit_ = false;
  return f;
}

LinkFunction LinkFunction::logistic(double z_max) {
  if (!(z_max > 0.0)) throw std::invalid_argument("logistic link: z_max must be positive");
  LinkFunction f;
  f.kind_ = LinkKind::logistic;
  f.g_lower_ = sigmoid_prime(z_max);
  f.g_upper_ = 0.25;
  f.z_max_ = z_max;
  f.range_in_unit_ = true;
  return f;
}

LinkFunction LinkFunction::custom(std::function<double(double)> g,
                                  std::function<double(double)> g_prime,
                                  double g_lower, double g_upper,
                                  std::function<double(double)> h,
                                  bool range_in_unit_interval) {
  if (!g || !g_prime) throw std::invalid_argument("custom link: g and g_prime are required");
  if (!(g_lower > 0.0)) throw std::invalid_argument("custom link: g_lower must be positive");
  if (!(g_upper >= g_lower)) throw std::invalid_argument("custom link: g_upper must be >= g_lower");
  LinkFunction f;
  f.kind_ = LinkKind::custom;
  f.g_ = std::move(g);
  f.g_prime_ = std::move(g_prime);
  f.h_ = std::move(h);
  f.g_lower_ = g_lower;
  f.g_upper_ = g_upper;
  f.z_max_ = std::numeric_limits<double>::infinity();
  f.range_in_unit_ = range_in_unit_interval;
  return f;
}

double LinkFunction::g(double z) const {
  switch (kind_) {
    case LinkKind::identity: return z;
    case LinkKind::logistic: return sigmoid(z);
    case LinkKind::custom: return g_(z);
  }
  return z;
}

double LinkFunction::g_prime(double z) const {
  switch (kind_) {
    case LinkKind::identity: return 1.0;
    case LinkKind::logistic: return sigmoid_prime(z);
    case LinkKind::custom: return g_prime_(z);
  }
  return 1.0;
}

double LinkFunction::g_inverse(double u) const {
  switch (kind_) {
    case LinkKind::identity:
      return u;
    case LinkKind::logistic:
      if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("logistic link: g_inverse requires u in (0,1)");
      return std::log(u / (1.0 - u));
    case LinkKind::custom:
      break;
  }
  // bracket the root of g(z) = u by doubling, then bisect with Newton steps
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 64 && g_(lo) > u; ++i) lo *= 2.0;
  for (int i = 0; i < 64 && g_(hi) < u; ++i) hi *= 2.0;
  if (g_(lo) > u || g_(hi) < u)
    throw std::domain_error("custom link: g_inverse target outside reachable range");
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    const double gz = g_(z);
    if (gz > u) hi = z; else lo = z;
    const double dz = g_prime_(z);
    double znext = dz > 0.0 ? z - (gz - u) / dz : 0.5 * (lo + hi);
    if (!(znext > lo && znext < hi)) znext = 0.5 * (lo + hi);
    if (std::abs(znext - z) < 1e-14 * (1.0 + std::abs(z))) return znext;
    z = znext;
  }
  return z;
}

double LinkFunction::h(double u) const {
  switch (kind_) {
    case LinkKind::identity: return 1.0;
    case LinkKind::logistic: return u * (1.0 - u);
    case LinkKind::custom:
      if (h_) return h_(u);
      return g_prime_(g_inverse(u));
  }
  return 1.0;
}

std::string LinkFunction::name() const {
  switch (kind_) {
    case LinkKind::identity: return "identity";
    case LinkKind::logistic: return "logistic";
    case LinkKind::custom: return "custom";
  }
  return "identity";
}

}  // namespace pricelab
