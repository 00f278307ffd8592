#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfuda {

using RealVector = std::vector<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File-system failures; kept distinct so callers can map them to IO errors.
struct IoError : Error {
  using Error::Error;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  int parameter_count = 0;
};

/// Numerically stable softmax (max-subtraction). Throws on empty input.
RealVector softmax(const RealVector& logits);

/// Returns v / ||v||. Throws "degenerate feature" for near-zero vectors.
RealVector l2_normalize(const RealVector& v);

/// Pulls a gradient w.r.t. the unit vector back to the raw vector.
RealVector l2_normalize_backward(const RealVector& v, const RealVector& grad_unit);

double dot(const RealVector& a, const RealVector& b);
double norm(const RealVector& v);

/// 1 - cos(a, b), in [0, 2].
double cosine_distance(const RealVector& a, const RealVector& b);

bool is_prob_vector(const RealVector& p, double tol = 1e-9);
void check_prob_vector(const RealVector& p);

/// Central differences, entry i = (f(x + h e_i) - f(x - h e_i)) / (2h).
RealVector finite_diff_grad(const std::function<double(const RealVector&)>& f,
                            const RealVector& point, double step);

/// buffer <- momentum * buffer + grads; params <- params - lr * buffer.
void sgd_step(RealVector& params, const RealVector& grads, double learning_rate,
              RealVector& momentum_buffer, double momentum);

/// max over entries of |a - n| / max(1, |a|, |n|).
GradientCheckReport compare_gradients(const RealVector& analytic, const RealVector& numeric);

void check_finite(const RealVector& v, const char* what);

}  // namespace sfuda
