#include "pricelab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace pricelab {

namespace {

double softplus(double u) {
  if (u > 35.0) return u;
  if (u < -35.0) return std::exp(u);
  return std::log1p(std::exp(u));
}

double entropy_term(double D) {
  double e = 0.0;
  if (D > 0.0 && D < 1.0) e = D * std::log(D) + (1.0 - D) * std::log(1.0 - D);
  return e;
}

template <typename F>
double simpson_recurse(const F& f, double a, double fa, double b, double fb,
                       double m, double fm, double whole, double tol,
                       int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

// adaptive Simpson, absolute tolerance; signed for b < a
template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

constexpr double kQuadTol = 1e-10;

// l = -int_{D}^{g(u_arg)} (u - D)/h(u) du, closed form where available
double obs_loglik(const LinkFunction& link, double u_arg, double D) {
  switch (link.kind()) {
    case LinkKind::identity:
      return -0.5 * (u_arg - D) * (u_arg - D);
    case LinkKind::logistic: {
      if (D < 0.0 || D > 1.0)
        throw std::runtime_error(
            "quasi_loglik: logistic link requires demand in [0,1]");
      return -D * softplus(-u_arg) - (1.0 - D) * softplus(u_arg) -
             entropy_term(D);
    }
    case LinkKind::custom: {
      const double mu = link.g(u_arg);
      const auto f = [&](double u) { return (u - D) / link.h(u); };
      return -integrate(f, D, mu, kQuadTol);
    }
  }
  return 0.0;
}

void check_history(const Eigen::VectorXd& theta,
                   const std::vector<Observation>& history) {
  for (const auto& obs : history)
    if (obs.z.size() != theta.size())
      throw std::invalid_argument("quasi_loglik: feature dimension mismatch");
}

// Regularized objective F(theta) = -lambda*g_lower*||theta||^2 + sum_t l_t.
// Identity-link instances are backed by sufficient statistics
// (A = sum z z', b = sum y z, y = D - offset), making evaluations O(dim^2).
class QmleObjective {
 public:
  QmleObjective(Eigen::MatrixXd A, Eigen::VectorXd b, double y_sq,
                double lambda)
      : identity_(true),
        A_(std::move(A)),
        b_(std::move(b)),
        y_sq_(y_sq),
        lambda_g_(lambda),
        dim_(static_cast<int>(b_.size())),
        lipschitz_(2.0 * lambda + A_.trace()) {}

  QmleObjective(const LinkFunction* link,
                const std::vector<Observation>* history, double lambda)
      : identity_(false),
        link_(link),
        history_(history),
        lambda_g_(lambda * link->g_lower()),
        dim_(static_cast<int>(history->front().z.size())) {
    double zn = 0.0;
    for (const auto& obs : *history) zn += obs.z.squaredNorm();
    lipschitz_ = 2.0 * lambda_g_ + link->g_upper() * zn;
  }

  static QmleObjective from_history_identity(
      const std::vector<Observation>& history, double lambda) {
    const auto dim = history.front().z.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    double y_sq = 0.0;
    for (const auto& obs : history) {
      const double y = obs.D - obs.offset;
      A.noalias() += obs.z * obs.z.transpose();
      b.noalias() += y * obs.z;
      y_sq += y * y;
    }
    return QmleObjective(std::move(A), std::move(b), y_sq, lambda);
  }

  int dim() const { return dim_; }
  double mu() const { return 2.0 * lambda_g_; }
  double lipschitz() const { return lipschitz_; }

  double value(const Eigen::VectorXd& theta) const {
    if (identity_) {
      return -lambda_g_ * theta.squaredNorm() -
             0.5 * (theta.dot(A_ * theta) - 2.0 * b_.dot(theta) + y_sq_);
    }
    double l = 0.0;
    for (const auto& obs : *history_)
      l += obs_loglik(*link_, obs.offset + obs.z.dot(theta), obs.D);
    return -lambda_g_ * theta.squaredNorm() + l;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& theta) const {
    if (identity_)
      return -2.0 * lambda_g_ * theta - A_ * theta + b_;
    Eigen::VectorXd g = -2.0 * lambda_g_ * theta;
    for (const auto& obs : *history_) {
      const double u = obs.offset + obs.z.dot(theta);
      g.noalias() += (obs.D - link_->g(u)) * obs.z;
    }
    return g;
  }

 private:
  bool identity_;
  const LinkFunction* link_ = nullptr;
  const std::vector<Observation>* history_ = nullptr;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  double y_sq_ = 0.0;
  double lambda_g_;
  int dim_;
  double lipschitz_ = 1.0;
};

Eigen::VectorXd project_ball(Eigen::VectorXd v, double radius) {
  const double n = v.norm();
  if (n > radius) v *= radius / n;
  return v;
}

// exact bound on max_{||theta'|| <= theta_bar} F(theta') - F(theta) for a
// mu-strongly-concave F with gradient g at theta
double dual_gap(const Eigen::VectorXd& theta, const Eigen::VectorXd& g,
                double mu, double theta_bar) {
  const Eigen::VectorXd u = mu * theta + g;
  const double un = u.norm();
  if (un <= mu * theta_bar) return g.squaredNorm() / (2.0 * mu);
  const double nu = un / theta_bar - mu;
  const Eigen::VectorXd w = (g - nu * theta) / (mu + nu);
  return std::max(g.dot(w) - 0.5 * mu * w.squaredNorm(), 0.0);
}

struct SolveResult {
  Eigen::VectorXd theta;
  double gap;
  double objective;
  int iterations;
  bool converged;
};

// Projected gradient ascent on the theta_bar ball: Barzilai-Borwein trial
// step, Armijo halving against a 10-value non-monotone reference, warm start.
SolveResult solve_ball_max(const QmleObjective& model, double theta_bar,
                           double tol, int max_iters,
                           const Eigen::VectorXd* warm) {
  constexpr double kArmijo = 1e-4;
  constexpr int kWindow = 10;

  const double mu = model.mu();
  Eigen::VectorXd theta = warm && warm->size() == model.dim()
                              ? project_ball(*warm, theta_bar)
                              : Eigen::VectorXd::Zero(model.dim());
  double F = model.value(theta);
  Eigen::VectorXd g = model.grad(theta);
  double gap = dual_gap(theta, g, mu, theta_bar);

  Eigen::VectorXd best_theta = theta;
  double best_F = F;

  double window[kWindow];
  window[0] = F;
  int window_len = 1, window_pos = 0;

  double s_bb = 1.0 / model.lipschitz();
  int iter = 0;
  while (gap > tol && iter < max_iters) {
    ++iter;
    double f_ref = window[0];
    for (int i = 1; i < window_len; ++i) f_ref = std::max(f_ref, window[i]);

    double s = std::clamp(s_bb, 1e-14, 1e14);
    Eigen::VectorXd theta_c;
    double F_c = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      theta_c = project_ball(theta + s * g, theta_bar);
      F_c = model.value(theta_c);
      if (F_c >= f_ref + kArmijo * g.dot(theta_c - theta)) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd g_c = model.grad(theta_c);
    const Eigen::VectorXd dtheta = theta_c - theta;
    if (dtheta.norm() == 0.0) break;
    const double denom = -dtheta.dot(g_c - g);
    s_bb = denom > 0.0 ? dtheta.squaredNorm() / denom : 1.0 / model.lipschitz();

    theta = std::move(theta_c);
    F = F_c;
    g = g_c;
    window_pos = (window_pos + 1) % kWindow;
    window[window_pos] = F;
    window_len = std::min(window_len + 1, kWindow);
    if (F > best_F) {
      best_F = F;
      best_theta = theta;
    }
    gap = dual_gap(theta, g, mu, theta_bar);
  }

  if (gap > tol && best_F > F) {
    theta = best_theta;
    F = best_F;
    g = model.grad(theta);
    gap = dual_gap(theta, g, mu, theta_bar);
  }
  return {std::move(theta), gap, F, iter, gap <= tol};
}

QmleObjective build_objective(const LinkFunction& link,
                              const std::vector<Observation>& history,
                              double lambda) {
  if (link.kind() == LinkKind::identity)
    return QmleObjective::from_history_identity(history, lambda);
  return QmleObjective(&link, &history, lambda);
}

void check_fit_inputs(const std::vector<Observation>& history,
                      const FitOptions& opts) {
  if (history.empty())
    throw std::invalid_argument("qmle_fit: history must be nonempty");
  const auto dim = history.front().z.size();
  for (const auto& obs : history)
    if (obs.z.size() != dim)
      throw std::invalid_argument("qmle_fit: inconsistent feature dimensions");
  if (!(opts.lambda > 0.0)) throw std::invalid_argument("qmle_fit: lambda must be positive");
  if (!(opts.theta_bar > 0.0)) throw std::invalid_argument("qmle_fit: theta_bar must be positive");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("qmle_fit: tol must be positive");
  if (opts.max_iters < 1) throw std::invalid_argument("qmle_fit: max_iters must be >= 1");
}

}  // namespace

double quasi_loglik(const LinkFunction& link, const Eigen::VectorXd& theta,
                    const std::vector<Observation>& history) {
  check_history(theta, history);
  double l = 0.0;
  for (const auto& obs : history)
    l += obs_loglik(link, obs.offset + obs.z.dot(theta), obs.D);
  return l;
}

double qmle_objective(const LinkFunction& link, const Eigen::VectorXd& theta,
                      const std::vector<Observation>& history, double lambda) {
  return -lambda * link.g_lower() * theta.squaredNorm() +
         quasi_loglik(link, theta, history);
}

Eigen::VectorXd qmle_gradient(const LinkFunction& link,
                              const Eigen::VectorXd& theta,
                              const std::vector<Observation>& history,
                              double lambda) {
  check_history(theta, history);
  Eigen::VectorXd g = -2.0 * lambda * link.g_lower() * theta;
  for (const auto& obs : history) {
    const double u = obs.offset + obs.z.dot(theta);
    g.noalias() += (obs.D - link.g(u)) * obs.z;
  }
  return g;
}

FitResult qmle_fit(const LinkFunction& link,
                   const std::vector<Observation>& history,
                   const FitOptions& opts) {
  check_fit_inputs(history, opts);
  const QmleObjective model = build_objective(link, history, opts.lambda);
  const Eigen::VectorXd* warm =
      opts.warm_start ? &*opts.warm_start : nullptr;
  SolveResult r =
      solve_ball_max(model, opts.theta_bar, opts.tol, opts.max_iters, warm);
  return {std::move(r.theta), r.gap, r.objective, r.iterations, r.converged};
}

std::vector<Observation> fold_known_gamma(
    const std::vector<KnownGammaRound>& rounds,
    const Eigen::VectorXd& gamma_star) {
  std::vector<Observation> history;
  history.reserve(rounds.size());
  for (const auto& r : rounds) {
    if (r.x.size() != gamma_star.size())
      throw std::invalid_argument("fold_known_gamma: covariate dimension mismatch");
    history.push_back({r.x, r.D, r.x.dot(gamma_star) * r.p});
  }
  return history;
}

FitResult qmle_fit_known_gamma(const LinkFunction& link,
                               const std::vector<KnownGammaRound>& rounds,
                               const Eigen::VectorXd& gamma_star,
                               const FitOptions& opts) {
  const double beta_bar_sq =
      opts.theta_bar * opts.theta_bar - gamma_star.squaredNorm();
  if (!(beta_bar_sq > 0.0))
    throw std::invalid_argument(
        "qmle_fit_known_gamma: ||gamma*|| must be below theta_bar");
  FitOptions beta_opts = opts;
  beta_opts.theta_bar = std::sqrt(beta_bar_sq);
  return qmle_fit(link, fold_known_gamma(rounds, gamma_star), beta_opts);
}

double confidence_radius(const DesignMatrix& design, int T, double lambda,
                         double theta_bar, double sigma_bar, double g_lower) {
  if (T < 1) throw std::invalid_argument("confidence_radius: T must be >= 1");
  if (!(lambda > 0.0) || !(theta_bar > 0.0) || !(sigma_bar > 0.0) || !(g_lower > 0.0))
    throw std::invalid_argument("confidence_radius: parameters must be positive");
  const double log_det_ratio =
      std::max(design.log_det() - design.dim() * std::log(lambda), 0.0);
  return 2.0 * std::sqrt(lambda) * theta_bar +
         (2.0 * sigma_bar / g_lower) *
             std::sqrt(2.0 * std::log(static_cast<double>(T)) + log_det_ratio);
}

double uniform_confidence_radius(int dim, int T, double lambda,
                                 double theta_bar, double sigma_bar,
                                 double g_lower) {
  if (dim < 1 || T < 1)
    throw std::invalid_argument("uniform_confidence_radius: dim and T must be >= 1");
  const double n = static_cast<double>(dim);
  const double log_det_ratio = n * std::log((n * lambda + T) / (n * lambda));
  return 2.0 * std::sqrt(lambda) * theta_bar +
         (2.0 * sigma_bar / g_lower) *
             std::sqrt(2.0 * std::log(static_cast<double>(T)) + log_det_ratio);
}

double suboptimality_gap(const LinkFunction& link, double lambda,
                         double gradient_mapping_norm) {
  if (!(lambda > 0.0)) throw std::invalid_argument("suboptimality_gap: lambda must be positive");
  return gradient_mapping_norm * gradient_mapping_norm /
         (4.0 * lambda * link.g_lower());
}

double gradient_mapping_norm(const LinkFunction& link,
                             const std::vector<Observation>& history,
                             double lambda, double theta_bar,
                             const Eigen::VectorXd& theta, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("gradient_mapping_norm: step must be positive");
  const Eigen::VectorXd g = qmle_gradient(link, theta, history, lambda);
  const Eigen::VectorXd theta_c = project_ball(theta + step * g, theta_bar);
  return (theta - theta_c).norm() / step;
}

double certified_gap(const LinkFunction& link,
                     const std::vector<Observation>& history, double lambda,
                     double theta_bar, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd g = qmle_gradient(link, theta, history, lambda);
  return dual_gap(theta, g, 2.0 * lambda * link.g_lower(), theta_bar);
}

bool ConfidenceEllipsoid::contains(const Eigen::VectorXd& theta) const {
  if (theta.norm() > theta_bar * (1.0 + 1e-12)) return false;
  const Eigen::VectorXd diff = theta - center;
  return std::sqrt(design.norm_sq(diff)) <= radius * (1.0 + 1e-12) + 1e-12;
}

EstimatorState::EstimatorState(LinkFunction link, int dim, double lambda,
                               double theta_bar, double tol, int max_iters)
    : link_(std::move(link)),
      lambda_(lambda),
      theta_bar_(theta_bar),
      tol_(tol),
      max_iters_(max_iters),
      design_(dim, lambda),
      theta_hat_(Eigen::VectorXd::Zero(dim)),
      identity_fast_(link_.kind() == LinkKind::identity),
      A_(Eigen::MatrixXd::Zero(dim, dim)),
      b_(Eigen::VectorXd::Zero(dim)) {
  if (!(theta_bar > 0.0))
    throw std::invalid_argument("EstimatorState: theta_bar must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("EstimatorState: tol must be positive");
}

void EstimatorState::add(const Observation& obs) {
  if (obs.z.size() != design_.dim())
    throw std::invalid_argument("EstimatorState: feature dimension mismatch");
  design_.update(obs.z);
  history_.push_back(obs);
  if (identity_fast_) {
    const double y = obs.D - obs.offset;
    A_.noalias() += obs.z * obs.z.transpose();
    b_.noalias() += y * obs.z;
    y_sq_ += y * y;
  }
}

void EstimatorState::refit() {
  if (history_.empty()) {
    theta_hat_.setZero();
    gap_ = 0.0;
    return;
  }
  const QmleObjective model =
      identity_fast_ ? QmleObjective(A_, b_, y_sq_, lambda_)
                     : QmleObjective(&link_, &history_, lambda_);
  SolveResult r =
      solve_ball_max(model, theta_bar_, tol_, max_iters_, &theta_hat_);
  theta_hat_ = std::move(r.theta);
  gap_ = r.gap;
}

ConfidenceEllipsoid EstimatorState::ellipsoid(double radius) const {
  return {theta_hat_, design_, radius, theta_bar_};
}

}  // namespace pricelab
