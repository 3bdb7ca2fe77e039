#include "pricelab/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pricelab {

PriceRange::PriceRange(double min, double max) : p_min(min), p_max(max) {
  if (!(min > 0.0) || !(max > min))
    throw std::invalid_argument("PriceRange: requires 0 < p_min < p_max");
}

double PriceRange::clip(double p) const {
  return std::min(std::max(p, p_min), p_max);
}

ShockSpec ShockSpec::bernoulli() { return {ShockKind::bernoulli, 0.0}; }

ShockSpec ShockSpec::gaussian(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("ShockSpec: sigma must be >= 0");
  return {ShockKind::gaussian, sigma};
}

ShockSpec ShockSpec::bounded_uniform(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("ShockSpec: sigma must be >= 0");
  return {ShockKind::bounded_uniform, sigma};
}

double ShockSpec::sigma_bar() const {
  switch (kind) {
    case ShockKind::bernoulli: return 0.5;
    case ShockKind::gaussian: return sigma;
    case ShockKind::bounded_uniform: return std::sqrt(3.0) * sigma;
  }
  return sigma;
}

DemandModel::DemandModel(LinkFunction link, ParamVector theta_star,
                         ShockSpec shock, double sigma_bar)
    : link_(std::move(link)),
      theta_star_(std::move(theta_star)),
      shock_(shock),
      sigma_bar_(sigma_bar > 0.0 ? sigma_bar : shock.sigma_bar()) {
  if (shock_.kind == ShockKind::bernoulli && !link_.range_in_unit_interval())
    throw std::invalid_argument(
        "DemandModel: bernoulli shock requires a link with range in [0,1]");
  if (!(sigma_bar_ > 0.0))
    throw std::invalid_argument("DemandModel: sigma_bar must be positive");
}

namespace {

void check_inputs(const ParamVector& theta, const Eigen::VectorXd& x, double p) {
  if (x.size() != theta.d())
    throw std::invalid_argument("mean_demand: covariate dimension mismatch");
  if (!std::isfinite(p))
    throw std::invalid_argument("mean_demand: price must be finite");
}

// slope/intercept of the link argument: u(p) = a + b*p
std::pair<double, double> link_arg_coeffs(const ParamVector& theta,
                                          const Eigen::VectorXd& x) {
  const auto d = x.size();
  const double a = theta.theta().head(d).dot(x);
  const double b = theta.theta().tail(d).dot(x);
  return {a, b};
}

constexpr double kGoldenR = 0.61803398874989485;
constexpr double kGoldenC = 1.0 - kGoldenR;

// golden-section maximization; ties resolve to the lower price
template <typename F>
std::pair<double, double> golden_max(const F& f, double lo, double hi,
                                     double bracket_eps) {
  double x0 = lo, x3 = hi;
  double x1 = x0 + kGoldenC * (x3 - x0);
  double x2 = x0 + kGoldenR * (x3 - x0);
  double f1 = f(x1), f2 = f(x2);
  while (x3 - x0 > bracket_eps) {
    if (f1 >= f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x0 + kGoldenC * (x3 - x0);
      f1 = f(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + kGoldenR * (x3 - x0);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

double mean_demand(const LinkFunction& link, const ParamVector& theta,
                   const Eigen::VectorXd& x, double p) {
  check_inputs(theta, x, p);
  const auto [a, b] = link_arg_coeffs(theta, x);
  return link.g(a + b * p);
}

double expected_revenue(const LinkFunction& link, const ParamVector& theta,
                        const Eigen::VectorXd& x, double p) {
  return p * mean_demand(link, theta, x, p);
}

PriceSolution optimal_price(const LinkFunction& link, const ParamVector& theta,
                            const Eigen::VectorXd& x, const PriceRange& range) {
  check_inputs(theta, x, range.p_min);
  const auto [a, b] = link_arg_coeffs(theta, x);
  const auto rev = [&](double p) { return p * link.g(a + b * p); };

  if (link.kind() == LinkKind::identity) {
    double p;
    if (b < 0.0) {
      p = range.clip(-a / (2.0 * b));
    } else if (b == 0.0) {
      p = a < 0.0 ? range.p_min : range.p_max;
    } else {
      p = rev(range.p_max) >= rev(range.p_min) ? range.p_max : range.p_min;
    }
    return {p, rev(p)};
  }

  // upward-sloping (or flat) demand in a nonnegative-range link: revenue
  // increases in p
  if (b >= 0.0) return {range.p_max, rev(range.p_max)};

  constexpr int kGrid = 256;
  const double step = (range.p_max - range.p_min) / kGrid;
  std::vector<double> r(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) r[i] = rev(range.p_min + i * step);

  double best_p = range.p_min, best_r = r[0];
  const auto consider = [&](double p, double rv) {
    if (rv > best_r || (rv == best_r && p < best_p)) {
      best_r = rv;
      best_p = p;
    }
  };
  for (int i = 0; i <= kGrid; ++i) {
    const bool left_ok = i == 0 || r[i] >= r[i - 1];
    const bool right_ok = i == kGrid || r[i] >= r[i + 1];
    consider(range.p_min + i * step, r[i]);
    if (left_ok && right_ok) {
      const double lo = range.p_min + std::max(i - 1, 0) * step;
      const double hi = range.p_min + std::min(i + 1, kGrid) * step;
      const auto [p, rv] = golden_max(rev, lo, hi, 1e-8);
      consider(p, rv);
    }
  }
  return {best_p, best_r};
}

double sample_demand(const DemandModel& model, const Eigen::VectorXd& x,
                     double p, RngEngine& rng) {
  const double mean = mean_demand(model.link(), model.theta_star(), x, p);
  switch (model.shock().kind) {
    case ShockKind::bernoulli: {
      if (mean < -1e-12 || mean > 1.0 + 1e-12)
        throw std::runtime_error("sample_demand: bernoulli mean outside [0,1]");
      std::bernoulli_distribution draw(std::clamp(mean, 0.0, 1.0));
      return draw(rng) ? 1.0 : 0.0;
    }
    case ShockKind::gaussian: {
      if (model.shock().sigma == 0.0) return mean;
      std::normal_distribution<double> draw(0.0, model.shock().sigma);
      return mean + draw(rng);
    }
    case ShockKind::bounded_uniform: {
      if (model.shock().sigma == 0.0) return mean;
      const double half = std::sqrt(3.0) * model.shock().sigma;
      std::uniform_real_distribution<double> draw(-half, half);
      return mean + draw(rng);
    }
  }
  return mean;
}

}  // namespace pricelab
