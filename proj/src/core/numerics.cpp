#include "core/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace sfuda {

void check_finite(const RealVector& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(std::string("non-finite value in ") + what);
  }
}

RealVector softmax(const RealVector& logits) {
  if (logits.empty()) throw Error("empty logits");
  check_finite(logits, "logits");
  const double m = *std::max_element(logits.begin(), logits.end());
  RealVector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double dot(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) throw Error("length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const RealVector& v) { return std::sqrt(dot(v, v)); }

RealVector l2_normalize(const RealVector& v) {
  const double n = norm(v);
  if (n <= 1e-12) throw Error("degenerate feature");
  RealVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

RealVector l2_normalize_backward(const RealVector& v, const RealVector& grad_unit) {
  const double n = norm(v);
  if (n <= 1e-12) throw Error("degenerate feature");
  if (v.size() != grad_unit.size()) throw Error("length mismatch");
  RealVector u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] / n;
  const double gu = dot(grad_unit, u);
  RealVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (grad_unit[i] - gu * u[i]) / n;
  return out;
}

double cosine_distance(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) throw Error("length mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= 1e-12 || nb <= 1e-12) throw Error("degenerate feature");
  const double d = 1.0 - dot(a, b) / (na * nb);
  return std::clamp(d, 0.0, 2.0);
}

bool is_prob_vector(const RealVector& p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < -tol || x > 1.0 + tol) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

void check_prob_vector(const RealVector& p) {
  if (!is_prob_vector(p)) throw Error("invalid probability vector");
}

RealVector finite_diff_grad(const std::function<double(const RealVector&)>& f,
                            const RealVector& point, double step) {
  if (!(step > 0.0 && step <= 1e-2)) throw Error("finite-difference step out of range");
  RealVector grad(point.size());
  RealVector x = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    x[i] = point[i] + step;
    const double fp = f(x);
    x[i] = point[i] - step;
    const double fm = f(x);
    x[i] = point[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw Error("non-finite function value");
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

void sgd_step(RealVector& params, const RealVector& grads, double learning_rate,
              RealVector& momentum_buffer, double momentum) {
  if (params.size() != grads.size() || params.size() != momentum_buffer.size())
    throw Error("shape mismatch");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum out of [0, 1)");
  for (std::size_t i = 0; i < params.size(); ++i) {
    momentum_buffer[i] = momentum * momentum_buffer[i] + grads[i];
    params[i] -= learning_rate * momentum_buffer[i];
  }
}

GradientCheckReport compare_gradients(const RealVector& analytic, const RealVector& numeric) {
  if (analytic.size() != numeric.size()) throw Error("shape mismatch");
  GradientCheckReport report;
  report.parameter_count = static_cast<int>(analytic.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric[i])});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return report;
}

}  // namespace sfuda
