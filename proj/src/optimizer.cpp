#include "seqlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "seqlab/error.hpp"

namespace seqlab {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double l1_norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

// Subgradient of f + c|x|_1 with the smallest norm.
void pseudo_gradient(std::span<const double> x, std::span<const double> g, double c,
                     std::span<double> pg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) {
      pg[i] = g[i] - c;
    } else if (x[i] > 0.0) {
      pg[i] = g[i] + c;
    } else if (g[i] + c < 0.0) {
      pg[i] = g[i] + c;
    } else if (g[i] - c > 0.0) {
      pg[i] = g[i] - c;
    } else {
      pg[i] = 0.0;
    }
  }
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double ys;
};

// d = -H * v by the two-loop recursion.
void two_loop(const std::deque<Correction>& mem, std::span<const double> v, std::span<double> d) {
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = -v[i];
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = dot(mem[k].s, d) / mem[k].ys;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * mem[k].y[i];
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    double gamma = last.ys / dot(last.y, last.y);
    for (double& di : d) di *= gamma;
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    double beta = dot(mem[k].y, d) / mem[k].ys;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * mem[k].s[i];
  }
}

}  // namespace

OptimizeResult minimize(const SmoothObjective& f, std::vector<double> x0,
                        const LbfgsOptions& opt) {
  if (opt.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (opt.memory < 1) throw ConfigError("L-BFGS memory must be at least 1");
  if (opt.l1 < 0.0) throw ConfigError("L1 coefficient must be non-negative");
  const std::size_t n = x0.size();
  const double c1 = opt.l1;
  const bool orthant = c1 > 0.0;

  OptimizeResult result;
  std::vector<double> x = std::move(x0);
  std::vector<double> g(n), pg(n), d(n), x_new(n), g_new(n), pg_new(n);

  auto evaluate = [&](std::span<const double> at, std::span<double> grad) {
    double v = f(at, grad);
    if (orthant) v += c1 * l1_norm(at);
    if (!std::isfinite(v)) throw NumericError("objective is not finite");
    return v;
  };
  auto steepest = [&](std::span<const double> at, std::span<const double> grad,
                      std::span<double> out) {
    if (orthant) {
      pseudo_gradient(at, grad, c1, out);
    } else {
      std::copy(grad.begin(), grad.end(), out.begin());
    }
  };

  double fx = evaluate(x, g);
  steepest(x, g, pg);
  result.log.push_back({0, fx, norm(pg)});
  std::vector<double> history{fx};
  std::deque<Correction> mem;

  result.stop_reason = "max_iterations";
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const double pg_norm = norm(pg);
    if (pg_norm <= 1e-10 * std::max(1.0, norm(x))) {
      result.stop_reason = "gradient";
      break;
    }

    two_loop(mem, pg, d);
    if (orthant) {
      // Keep only components that agree in sign with the steepest descent.
      for (std::size_t i = 0; i < n; ++i) {
        if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
      }
    }
    double slope = dot(pg, d);
    if (!(slope < 0.0)) {
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
      slope = -pg_norm * pg_norm;
    }

    // Orthant for this step: sign of x, or of -pg where x is zero.
    std::vector<double> orth;
    if (orthant) {
      orth.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        orth[i] = x[i] != 0.0 ? (x[i] > 0.0 ? 1.0 : -1.0) : (pg[i] < 0.0 ? 1.0 : (pg[i] > 0.0 ? -1.0 : 0.0));
      }
    }

    double step = mem.empty() ? 1.0 / norm(d) : 1.0;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < n; ++i) {
        x_new[i] = x[i] + step * d[i];
        if (orthant && x_new[i] * orth[i] <= 0.0) x_new[i] = 0.0;
      }
      f_new = evaluate(x_new, g_new);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += pg[i] * (x_new[i] - x[i]);
      if (f_new <= fx + 1e-4 * decrease && f_new <= fx) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.stop_reason = "linesearch";
      break;
    }

    Correction c;
    c.s.resize(n);
    c.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = x_new[i] - x[i];
      c.y[i] = g_new[i] - g[i];
    }
    c.ys = dot(c.s, c.y);
    if (c.ys > 1e-12 * dot(c.y, c.y)) {
      mem.push_back(std::move(c));
      if (mem.size() > static_cast<std::size_t>(opt.memory)) mem.pop_front();
    }

    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    steepest(x, g, pg);
    result.iterations = iter;
    result.log.push_back({iter, fx, norm(pg)});
    history.push_back(fx);

    if (static_cast<int>(history.size()) > opt.period) {
      double old = history[history.size() - 1 - static_cast<std::size_t>(opt.period)];
      if ((old - fx) / std::max(std::abs(fx), 1.0) < opt.tolerance) {
        result.stop_reason = "converged";
        break;
      }
    }
  }
  result.x = std::move(x);
  result.objective = fx;
  return result;
}

}  // namespace seqlab
