#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace seqlab {

struct LbfgsOptions {
  int max_iterations = 100;
  // Stop when (f[k - period] - f[k]) / max(|f[k]|, 1) < tolerance.
  double tolerance = 1e-5;
  int period = 10;
  // Number of (s, y) correction pairs kept.
  int memory = 6;
  // L1 coefficient. Positive values switch to orthant-wise steps.
  double l1 = 0.0;
  int max_linesearch = 40;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;  // pseudo-gradient norm when l1 > 0
};

struct OptimizeResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  std::string stop_reason;
  // Entry 0 is the starting point, then one record per accepted step.
  std::vector<IterationRecord> log;
};

// Smooth part of the objective: returns f(x) and writes grad f(x).
using SmoothObjective = std::function<double(std::span<const double> x, std::span<double> grad)>;

// Minimizes f(x) + l1 * |x|_1 with limited-memory BFGS, using OWL-QN
// (pseudo-gradient, orthant projection, backtracking Armijo search) when
// l1 > 0. Accepted steps never increase the objective.
OptimizeResult minimize(const SmoothObjective& f, std::vector<double> x0,
                        const LbfgsOptions& options);

}  // namespace seqlab
