#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ellcm {

struct OdeConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0 picks one from the span
  double min_step = 1e-14;
  long max_steps = 2000000;
};

struct OdeStats {
  long steps = 0;
  long rejections = 0;
  long evaluations = 0;
  double max_error = 0.0;  // largest accepted scaled error estimate
};

class StepUnderflow : public std::runtime_error {
 public:
  StepUnderflow(double s, const std::string& what) : std::runtime_error(what), s_(s) {}
  double at() const { return s_; }

 private:
  double s_;
};

/// Dormand–Prince 5(4) on a real parameter s with a state of any Eigen scalar.
/// The integrator lands exactly on every output point, where `observe(s, y)` is
/// called; the first output point must be s0.
template <typename Scalar>
class Dopri5 {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Dopri5(OdeConfig cfg = {}) : cfg_(cfg) {}

  template <typename Rhs, typename Observer>
  Vector integrate(Rhs&& f, Vector y, const std::vector<double>& outputs, Observer&& observe) {
    if (outputs.empty()) return y;
    stats_ = {};
    double s = outputs.front();
    last_s_ = s;
    last_y_ = y;
    observe(s, y);
    if (outputs.size() < 2) return y;
    const double span = std::abs(outputs.back() - s);
    const double dir = outputs.back() >= s ? 1.0 : -1.0;
    double h = cfg_.initial_step > 0 ? cfg_.initial_step : 1e-3 * span;
    Vector k1 = f(s, y);
    ++stats_.evaluations;
    for (std::size_t next = 1; next < outputs.size(); ++next) {
      const double target = outputs[next];
      while (dir * (target - s) > 0) {
        if (stats_.steps + stats_.rejections >= cfg_.max_steps)
          throw StepUnderflow(s, "step budget exhausted");
        const double remaining = std::abs(target - s);
        const bool last = h >= remaining;
        const double hs = last ? remaining : h;
        Vector y_new, k7;
        const double err = attempt(f, s, y, k1, dir * hs, y_new, k7);
        if (err <= 1.0) {
          s = last ? target : s + dir * hs;
          y = std::move(y_new);
          k1 = std::move(k7);
          last_s_ = s;
          last_y_ = y;
          ++stats_.steps;
          stats_.max_error = std::max(stats_.max_error, err);
        } else {
          ++stats_.rejections;
        }
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err <= 1.0 && last) {
          h = std::max(h, hs * std::min(fac, 1.0));
        } else {
          h = hs * fac;
        }
        if (h < cfg_.min_step) throw StepUnderflow(s, "step size underflow");
      }
      observe(s, y);
    }
    return y;
  }

  const OdeStats& stats() const { return stats_; }
  /// Last accepted point, for reporting after a failure.
  double last_s() const { return last_s_; }
  const Vector& last_y() const { return last_y_; }

 private:
  template <typename Rhs>
  double attempt(Rhs& f, double s, const Vector& y, const Vector& k1, double h, Vector& y_new,
                 Vector& k7) {
    const Vector k2 = f(s + h / 5, y + h * (k1 / 5));
    const Vector k3 = f(s + 3 * h / 10, y + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
    const Vector k4 = f(s + 4 * h / 5, y + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
    const Vector k5 = f(s + 8 * h / 9, y + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 +
                                                64448.0 / 6561 * k3 - 212.0 / 729 * k4));
    const Vector k6 = f(s + h, y + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 +
                                        46732.0 / 5247 * k3 + 49.0 / 176 * k4 -
                                        5103.0 / 18656 * k5));
    y_new = y + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 -
                     2187.0 / 6784 * k5 + 11.0 / 84 * k6);
    k7 = f(s + h, y_new);
    stats_.evaluations += 6;
    const Vector e = h * (71.0 / 57600 * k1 - 71.0 / 16695 * k3 + 71.0 / 1920 * k4 -
                          17253.0 / 339200 * k5 + 22.0 / 525 * k6 - 1.0 / 40 * k7);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      const double r = std::abs(e[i]) / sc;
      acc += r * r;
    }
    const double err = y.size() ? std::sqrt(acc / y.size()) : 0.0;
    return std::isfinite(err) ? err : 1e10;
  }

  OdeConfig cfg_;
  OdeStats stats_;
  double last_s_ = 0.0;
  Vector last_y_;
};

}  // namespace ellcm
