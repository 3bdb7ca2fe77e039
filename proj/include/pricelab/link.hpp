#pragma once

#include <functional>
#include <string>

namespace pricelab {

enum class LinkKind { identity, logistic, custom };

// Monotone link g with derivative bounds g_lower <= g'(z) <= g_upper on the
// working domain |z| <= z_max, plus the quasi-likelihood weight
// h(u) = g'(g^{-1}(u)).
class LinkFunction {
 public:
  static LinkFunction identity();
  static LinkFunction logistic(double z_max = 3.0);
  static LinkFunction custom(std::function<double(double)> g,
                             std::function<double(double)> g_prime,
                             double g_lower, double g_upper,
                             std::function<double(double)> h = nullptr,
                             bool range_in_unit_interval = false);

  LinkKind kind() const { return kind_; }
  double g(double z) const;
  double g_prime(double z) const;
  double g_lower() const { return g_lower_; }
  double g_upper() const { return g_upper_; }
  double z_max() const { return z_max_; }
  double h(double u) const;
  double g_inverse(double u) const;
  // true when the range of g lies in [0,1] (bernoulli-compatible)
  bool range_in_unit_interval() const { return range_in_unit_; }
  std::string name() const;

 private:
  LinkFunction() = default;

  LinkKind kind_ = LinkKind::identity;
  std::function<double(double)> g_;
  std::function<double(double)> g_prime_;
  std::function<double(double)> h_;
  double g_lower_ = 1.0;
  double g_upper_ = 1.0;
  double z_max_ = 0.0;
  bool range_in_unit_ = false;
};

}  // namespace pricelab
