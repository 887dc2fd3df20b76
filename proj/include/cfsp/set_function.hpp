#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cfsp/graph.hpp"

namespace cfsp {

/// A real-valued set function on {0..n-1} with F(empty) = 0.
///
/// An optional sweep evaluates all prefixes of a vertex ordering at once;
/// without it prefixes are evaluated one by one.
class SetFunction {
 public:
  using Evaluator = std::function<double(const Membership&)>;
  /// Writes F(first k+1 vertices of order) into out[k] for k < order.size().
  using Sweep = std::function<void(std::span<const Vertex> order, std::span<double> out)>;

  SetFunction() = default;

  SetFunction(std::size_t ground_size, Evaluator eval, Sweep sweep = {})
      : n_(ground_size), eval_(std::move(eval)), sweep_(std::move(sweep)) {
    if (!eval_) throw std::invalid_argument("SetFunction: empty evaluator");
  }

  std::size_t ground_size() const noexcept { return n_; }
  bool has_sweep() const noexcept { return static_cast<bool>(sweep_); }

  double operator()(const Membership& in) const {
    if (in.size() != n_) throw std::invalid_argument("SetFunction: membership has wrong size");
    return eval_(in);
  }

  double operator()(std::span<const Vertex> set) const { return (*this)(to_membership(n_, set)); }

  std::vector<double> prefix_values(std::span<const Vertex> order) const {
    std::vector<double> out(order.size());
    if (sweep_) {
      sweep_(order, out);
      return out;
    }
    Membership in(n_, false);
    for (std::size_t k = 0; k < order.size(); ++k) {
      in[order[k]] = true;
      out[k] = eval_(in);
    }
    return out;
  }

  friend SetFunction operator+(const SetFunction& a, const SetFunction& b) {
    check_same(a, b);
    Evaluator e = [a, b](const Membership& in) { return a.eval_(in) + b.eval_(in); };
    Sweep s;
    if (a.sweep_ && b.sweep_) {
      s = [a, b](std::span<const Vertex> order, std::span<double> out) {
        std::vector<double> tmp(out.size());
        a.sweep_(order, out);
        b.sweep_(order, tmp);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += tmp[k];
      };
    }
    return SetFunction(a.n_, std::move(e), std::move(s));
  }

  friend SetFunction operator*(double c, const SetFunction& a) {
    Evaluator e = [c, a](const Membership& in) { return c * a.eval_(in); };
    Sweep s;
    if (a.sweep_) {
      s = [c, a](std::span<const Vertex> order, std::span<double> out) {
        a.sweep_(order, out);
        for (double& x : out) x *= c;
      };
    }
    return SetFunction(a.n_, std::move(e), std::move(s));
  }

  friend SetFunction operator-(const SetFunction& a, const SetFunction& b) { return a + (-1.0) * b; }

 private:
  static void check_same(const SetFunction& a, const SetFunction& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("SetFunction: ground sizes differ");
  }

  std::size_t n_ = 0;
  Evaluator eval_;
  Sweep sweep_;
};

// --- factories -------------------------------------------------------------------

inline SetFunction zero_function(std::size_t n) {
  return SetFunction(
      n, [](const Membership&) { return 0.0; },
      [](std::span<const Vertex>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); });
}

inline SetFunction cut_function(const Graph& g) {
  auto sweep = [g](std::span<const Vertex> order, std::span<double> out) {
    Membership in(g.num_vertices(), false);
    double cut = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      Vertex v = order[k];
      double inside = 0.0;
      for (const auto& nb : g.neighbors(v))
        if (in[nb.vertex]) inside += nb.weight;
      cut += g.degree(v) - 2.0 * inside;
      in[v] = true;
      out[k] = cut;
    }
  };
  return SetFunction(g.num_vertices(), [g](const Membership& in) { return cut_value(g, in); }, sweep);
}

inline SetFunction assoc_function(const Graph& g) {
  auto sweep = [g](std::span<const Vertex> order, std::span<double> out) {
    Membership in(g.num_vertices(), false);
    double assoc = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      Vertex v = order[k];
      for (const auto& nb : g.neighbors(v))
        if (in[nb.vertex]) assoc += 2.0 * nb.weight;
      in[v] = true;
      out[k] = assoc;
    }
  };
  return SetFunction(g.num_vertices(), [g](const Membership& in) { return assoc_value(g, in); },
                     sweep);
}

/// phi(vol_w(A)) for nonempty A and 0 for the empty set.
inline SetFunction volume_transform(std::vector<double> weights, std::function<double(double)> phi) {
  auto w = std::make_shared<const std::vector<double>>(std::move(weights));
  auto eval = [w, phi](const Membership& in) {
    double vol = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < w->size(); ++i)
      if (in[i]) {
        vol += (*w)[i];
        any = true;
      }
    return any ? phi(vol) : 0.0;
  };
  auto sweep = [w, phi](std::span<const Vertex> order, std::span<double> out) {
    double vol = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      vol += (*w)[order[k]];
      out[k] = phi(vol);
    }
  };
  return SetFunction(w->size(), eval, sweep);
}

inline SetFunction modular_function(std::vector<double> weights) {
  return volume_transform(std::move(weights), [](double v) { return v; });
}

inline SetFunction volume_function(const VertexWeights& w) {
  return modular_function({w.values().begin(), w.values().end()});
}

/// P(A) = 1 for A nonempty, 0 otherwise.
inline SetFunction nonempty_function(std::size_t n) {
  return volume_transform(std::vector<double>(n, 0.0), [](double) { return 1.0; });
}

/// min{k, vol_w(A)}.
inline SetFunction truncated_volume(const VertexWeights& w, double k) {
  return volume_transform({w.values().begin(), w.values().end()},
                          [k](double v) { return std::min(k, v); });
}

/// vol_w(A) * vol_w(V \ A).
/// total - v, snapped to zero when the difference is rounding noise.
inline double complement_volume(double total, double v) {
  double rest = total - v;
  return rest <= 1e-12 * std::abs(total) ? 0.0 : rest;
}

inline SetFunction volume_product(const VertexWeights& w) {
  const double total = w.total();
  return volume_transform({w.values().begin(), w.values().end()},
                          [total](double v) { return v * complement_volume(total, v); });
}

/// min{vol_w(A), vol_w(V \ A)}.
inline SetFunction cheeger_balance(const VertexWeights& w) {
  const double total = w.total();
  return volume_transform({w.values().begin(), w.values().end()},
                          [total](double v) { return std::min(v, complement_volume(total, v)); });
}

/// A pair of set functions forming the objective numerator / denominator.
struct SetRatio {
  SetFunction numerator;
  SetFunction denominator;

  /// +inf where the denominator vanishes.
  double operator()(const Membership& in) const {
    double den = denominator(in);
    return den > 0.0 ? numerator(in) / den : std::numeric_limits<double>::infinity();
  }
};

}  // namespace cfsp
