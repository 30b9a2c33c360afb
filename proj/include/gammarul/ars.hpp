#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gammarul/errors.hpp"
#include "gammarul/rng.hpp"

// Adaptive rejection sampling for log-concave densities (tangent upper hull,
// chord lower hull with squeeze test). Exact draws; every rejection refines
// the hull, so repeated draws from one sampler get cheaper.

namespace gammarul {

class AdaptiveRejectionSampler {
 public:
  AdaptiveRejectionSampler(std::function<double(double)> log_density,
                           std::function<double(double)> derivative, double lower,
                           double upper, std::vector<double> init_abscissae)
      : logf_(std::move(log_density)),
        dlogf_(std::move(derivative)),
        lower_(lower),
        upper_(upper) {
    if (!(lower_ < upper_))
      throw config_error("ars: domain bounds must satisfy lower < upper");
    std::sort(init_abscissae.begin(), init_abscissae.end());
    init_abscissae.erase(std::unique(init_abscissae.begin(), init_abscissae.end()),
                         init_abscissae.end());
    for (double x : init_abscissae) {
      if (!(x > lower_ && x < upper_)) continue;
      nodes_.push_back(eval(x));
    }
    if (nodes_.size() < 2)
      throw config_error("ars: need at least two distinct interior abscissae");

    // Unbounded sides need a tangent sloping toward the boundary, otherwise
    // the hull has infinite mass. Walk outward until that holds.
    if (std::isinf(upper_)) {
      double stride = std::max(1.0, std::fabs(nodes_.back().x));
      int tries = 0;
      while (nodes_.back().dh >= 0.0) {
        if (++tries > 60)
          throw model_error("ars: could not find a decreasing tangent on the right");
        nodes_.push_back(eval(nodes_.back().x + stride));
        stride *= 2.0;
      }
    }
    if (std::isinf(lower_)) {
      double stride = std::max(1.0, std::fabs(nodes_.front().x));
      int tries = 0;
      while (nodes_.front().dh <= 0.0) {
        if (++tries > 60)
          throw model_error("ars: could not find an increasing tangent on the left");
        nodes_.insert(nodes_.begin(), eval(nodes_.front().x - stride));
        stride *= 2.0;
      }
    }
    check_slopes();
    rebuild();
  }

  double draw(RngStream& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double total = masses_.back();
      if (!(total > 0.0) || !std::isfinite(total))
        throw numeric_error("ars: degenerate hull mass");
      const double u = rng.uniform() * total;
      std::size_t seg =
          static_cast<std::size_t>(std::upper_bound(masses_.begin(), masses_.end(), u) -
                                   masses_.begin());
      if (seg >= seg_mass_.size()) seg = seg_mass_.size() - 1;
      const double within = u - (seg == 0 ? 0.0 : masses_[seg - 1]);
      double w = within / seg_mass_[seg];
      if (!std::isfinite(w)) w = 0.5;
      w = std::min(1.0 - 1e-16, std::max(1e-300, w));
      const double x = sample_segment(seg, w);
      const double hull = tangent_value(seg, x);
      const double squeeze = squeeze_value(x);
      if (squeeze > hull + 1e-8 * std::max(1.0, std::fabs(hull)))
        throw model_error("ars: chord hull exceeds the tangent hull, target is not "
                          "log-concave");

      const double lnu = std::log(rng.uniform());
      if (lnu <= squeeze - hull) return x;  // squeeze accept, no eval

      const Node cand = eval(x);
      verify_concave(cand, hull);
      const bool accept = lnu <= cand.h - hull;
      if (!accept) ++rejections_;
      if (nodes_.size() < 64) {
        insert(cand);
        rebuild();
      }
      if (accept) return x;
    }
    throw numeric_error("ars: acceptance loop failed to terminate");
  }

  std::size_t evaluations() const { return evals_; }
  std::size_t rejections() const { return rejections_; }

 private:
  struct Node {
    double x, h, dh;
  };

  Node eval(double x) {
    ++evals_;
    const double h = logf_(x);
    const double dh = dlogf_(x);
    if (!std::isfinite(h) || !std::isfinite(dh))
      throw numeric_error("ars: log density not finite at x = " + std::to_string(x));
    return Node{x, h, dh};
  }

  void check_slopes() const {
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const double tol =
          1e-8 * std::max({1.0, std::fabs(nodes_[i].dh), std::fabs(nodes_[i + 1].dh)});
      if (nodes_[i].dh < nodes_[i + 1].dh - tol)
        throw model_error("ars: derivative increases between abscissae, target is not "
                          "log-concave");
    }
  }

  void verify_concave(const Node& cand, double hull_at_x) const {
    const double tol = 1e-8 * std::max(1.0, std::fabs(cand.h));
    if (cand.h > hull_at_x + tol)
      throw model_error("ars: density exceeds the tangent hull, target is not log-concave");
    const double lo = squeeze_value(cand.x);
    if (std::isfinite(lo) && cand.h < lo - tol)
      throw model_error("ars: density below the chord hull, target is not log-concave");
    // slope ordering against neighbours
    const auto it = std::lower_bound(
        nodes_.begin(), nodes_.end(), cand.x,
        [](const Node& n, double v) { return n.x < v; });
    const double stol = 1e-8 * std::max(1.0, std::fabs(cand.dh));
    if (it != nodes_.begin() && std::prev(it)->dh < cand.dh - stol)
      throw model_error("ars: derivative ordering violated, target is not log-concave");
    if (it != nodes_.end() && cand.dh < it->dh - stol)
      throw model_error("ars: derivative ordering violated, target is not log-concave");
  }

  void insert(const Node& cand) {
    const auto it = std::lower_bound(
        nodes_.begin(), nodes_.end(), cand.x,
        [](const Node& n, double v) { return n.x < v; });
    if (it != nodes_.end() && it->x == cand.x) return;
    nodes_.insert(it, cand);
  }

  // Tangent intersections and segment masses. z_[i] .. z_[i+1] is the stretch
  // governed by the tangent at nodes_[i].
  void rebuild() {
    const std::size_t k = nodes_.size();
    z_.assign(k + 1, 0.0);
    z_.front() = lower_;
    z_.back() = upper_;
    for (std::size_t i = 1; i < k; ++i) {
      const Node& a = nodes_[i - 1];
      const Node& b = nodes_[i];
      const double dslope = a.dh - b.dh;
      double z;
      if (std::fabs(dslope) < 1e-12 * std::max(1.0, std::fabs(a.dh)))
        z = 0.5 * (a.x + b.x);
      else
        z = (b.h - a.h - b.x * b.dh + a.x * a.dh) / dslope;
      z_[i] = std::clamp(z, a.x, b.x);
    }

    // endpoint hull values per segment, on the log scale
    ua_.assign(k, 0.0);
    ub_.assign(k, 0.0);
    double off = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      ua_[i] = tangent_raw(i, z_[i]);
      ub_[i] = tangent_raw(i, z_[i + 1]);
      if (std::isfinite(ua_[i])) off = std::max(off, ua_[i]);
      if (std::isfinite(ub_[i])) off = std::max(off, ub_[i]);
    }
    off_ = off;

    seg_mass_.assign(k, 0.0);
    masses_.assign(k, 0.0);
    double cum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double c = nodes_[i].dh;
      const double width = z_[i + 1] - z_[i];
      double mass;
      if (std::fabs(c) * std::min(width, 1e300) < 1e-12) {
        if (std::isinf(width))
          throw numeric_error("ars: flat tangent over an unbounded stretch");
        mass = std::exp(ua_[i] - off_) * width;
      } else if (c > 0.0) {
        mass = std::exp(ub_[i] - off_) * (-std::expm1(-c * width)) / c;
      } else {
        mass = std::exp(ua_[i] - off_) * (-std::expm1(c * width)) / (-c);
      }
      seg_mass_[i] = mass;
      cum += mass;
      masses_[i] = cum;
    }
  }

  double tangent_raw(std::size_t seg, double x) const {
    const Node& nd = nodes_[seg];
    if (std::isinf(x)) {
      // limit of a linear function toward an unbounded end
      const double sign = x > 0 ? 1.0 : -1.0;
      if (nd.dh == 0.0) return nd.h;
      return (sign * nd.dh > 0.0) ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
    }
    return nd.h + nd.dh * (x - nd.x);
  }

  double tangent_value(std::size_t seg, double x) const { return tangent_raw(seg, x); }

  // Chord lower hull; -inf outside the abscissa range.
  double squeeze_value(double x) const {
    if (x <= nodes_.front().x || x >= nodes_.back().x)
      return -std::numeric_limits<double>::infinity();
    const auto it = std::upper_bound(
        nodes_.begin(), nodes_.end(), x,
        [](double v, const Node& n) { return v < n.x; });
    const Node& b = *it;
    const Node& a = *std::prev(it);
    const double t = (x - a.x) / (b.x - a.x);
    return a.h + t * (b.h - a.h);
  }

  // Inverse-CDF draw within segment seg at cumulative fraction w in (0,1).
  double sample_segment(std::size_t seg, double w) const {
    const double a = z_[seg];
    const double b = z_[seg + 1];
    const double c = nodes_[seg].dh;
    if (std::isinf(a)) {
      // left-unbounded stretch, c > 0
      return b + std::log(w) / c;
    }
    if (std::isinf(b)) {
      // right-unbounded stretch, c < 0
      return a + std::log1p(-w) / c;
    }
    const double q = c * (b - a);
    double x;
    if (std::fabs(q) < 1e-10)
      x = a + w * (b - a);
    else if (q > 36.0)
      x = b + std::log(w) / c;
    else
      x = a + std::log1p(w * std::expm1(q)) / c;
    return std::clamp(x, a, b);
  }

  std::function<double(double)> logf_;
  std::function<double(double)> dlogf_;
  double lower_, upper_;
  std::vector<Node> nodes_;
  std::vector<double> z_;
  std::vector<double> ua_, ub_;
  std::vector<double> seg_mass_;
  std::vector<double> masses_;  // cumulative
  double off_ = 0.0;
  std::size_t evals_ = 0;
  std::size_t rejections_ = 0;
};

/// One exact draw from a log-concave density on (lower, upper).
inline double ars_sample(const std::function<double(double)>& log_density,
                         const std::function<double(double)>& derivative, double lower,
                         double upper, std::vector<double> init_abscissae, RngStream& rng) {
  AdaptiveRejectionSampler sampler(log_density, derivative, lower, upper,
                                   std::move(init_abscissae));
  return sampler.draw(rng);
}

}  // namespace gammarul
