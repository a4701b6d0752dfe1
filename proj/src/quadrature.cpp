#include "skewerg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skewerg/error.hpp"

namespace skewerg::quad {
namespace {

struct Segment {
  double lo;
  double hi;
  bool singular_lo;
  bool singular_hi;
};

bool contains(std::span<const double> points, double x) {
  const double tol = 1e-14 * std::max(1.0, std::abs(x));
  return std::any_of(points.begin(), points.end(),
                     [&](double p) { return std::abs(p - x) <= tol; });
}

std::vector<Segment> split(double a, double b, std::span<const double> singular,
                           std::span<const double> breakpoints) {
  std::vector<double> cuts{a, b};
  for (double s : singular) {
    if (s > a && s < b) cuts.push_back(s);
  }
  for (double s : breakpoints) {
    if (s > a && s < b) cuts.push_back(s);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double u, double v) { return std::abs(u - v) <= 1e-14 * std::max(1.0, std::abs(u)); }),
             cuts.end());

  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Segment seg{cuts[i], cuts[i + 1], contains(singular, cuts[i]), contains(singular, cuts[i + 1])};
    if (seg.singular_lo && seg.singular_hi) {
      const double mid = 0.5 * (seg.lo + seg.hi);
      out.push_back({seg.lo, mid, true, false});
      out.push_back({mid, seg.hi, false, true});
    } else {
      out.push_back(seg);
    }
  }
  return out;
}

void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::QuadratureFailure, std::string("non-finite value in ") + where);
  }
}

struct Panel {
  double lo;
  double hi;
  Result estimate;
  std::size_t piece = 0;
  bool operator<(const Panel& other) const { return estimate.error < other.estimate.error; }
};

// Single 31-point Gauss-Kronrod estimate on [lo, hi] with the embedded
// 15-point Gauss rule as error estimate.
Panel kronrod_panel(const Integrand& f, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  using G = boost::math::quadrature::gauss<double, 15>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double kronrod = 0.0;
  double gauss = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < xk.size(); ++i) {
    double v;
    double a;
    if (xk[i] == 0.0) {
      v = f(mid);
      a = std::abs(v);
    } else {
      const double left = f(mid - half * xk[i]);
      const double right = f(mid + half * xk[i]);
      v = left + right;
      a = std::abs(left) + std::abs(right);
    }
    kronrod += wk[i] * v;
    l1 += wk[i] * a;
    if (i % 2 == 0) gauss += wg[i / 2] * v;
  }
  Panel p{lo, hi, {}};
  p.estimate.value = half * kronrod;
  p.estimate.l1 = half * l1;
  p.estimate.error = std::max(half * std::abs(kronrod - gauss),
                              4.0 * std::numeric_limits<double>::epsilon() * p.estimate.l1);
  check_finite(p.estimate.value, "gauss-kronrod panel");
  return p;
}

void accumulate(Result& total, const Result& part) {
  total.value += part.value;
  total.error += part.error;
  total.l1 += part.l1;
}

constexpr int kPower = 8;

// Near a singular point s the integral over x = s + dir * u^8 is taken in u,
// which turns x^-a and log x endpoint behaviour into a bounded integrand.
struct SingularMap {
  double s;
  double direction;
  double width;  // |t - s|

  double u_max() const { return std::pow(width, 1.0 / kPower); }
  double x(double u) const {
    const double tmin = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(s);
    return s + direction * std::max(std::pow(u, kPower), tmin);
  }
  double jacobian(double u) const { return kPower * std::pow(u, kPower - 1); }
};

}  // namespace

Result integrate(const Integrand& f, double a, double b, std::span<const double> singular_points,
                 std::span<const double> breakpoints, const Options& options) {
  if (!(a < b)) {
    if (a == b) return {};
    Result r = integrate(f, b, a, singular_points, breakpoints, options);
    r.value = -r.value;
    return r;
  }
  // Global adaptive refinement: the panel with the largest error estimate is
  // bisected until the summed error meets panel_tolerance * L1.
  std::vector<Integrand> pieces;
  std::vector<std::pair<double, double>> initial;
  std::vector<std::size_t> owner;
  for (const Segment& seg : split(a, b, singular_points, breakpoints)) {
    if (!seg.singular_lo && !seg.singular_hi) {
      pieces.push_back(f);
      initial.emplace_back(seg.lo, seg.hi);
      owner.push_back(pieces.size() - 1);
      continue;
    }
    const double s = seg.singular_lo ? seg.lo : seg.hi;
    const double t = seg.singular_lo ? seg.hi : seg.lo;
    const SingularMap map{s, t > s ? 1.0 : -1.0, std::abs(t - s)};
    pieces.push_back([&f, map](double u) { return f(map.x(u)) * map.jacobian(u); });
    const double top = map.u_max();
    for (int j = 0; j < options.max_depth; ++j) {
      initial.emplace_back(std::ldexp(top, -(j + 1)), std::ldexp(top, -j));
      owner.push_back(pieces.size() - 1);
    }
    initial.emplace_back(0.0, std::ldexp(top, -options.max_depth));
    owner.push_back(pieces.size() - 1);
  }
  std::priority_queue<Panel> panels;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    Panel p = kronrod_panel(pieces[owner[i]], initial[i].first, initial[i].second);
    p.piece = owner[i];
    panels.push(p);
  }
  const Result fixed;

  auto totals = [&] {
    Result r = fixed;
    auto copy = panels;
    while (!copy.empty()) {
      accumulate(r, copy.top().estimate);
      copy.pop();
    }
    return r;
  };
  Result total = totals();
  constexpr std::size_t kMaxPanels = 200000;
  while (total.error > options.panel_tolerance * total.l1 && panels.size() < kMaxPanels) {
    const Panel worst = panels.top();
    if (worst.hi - worst.lo < std::ldexp(std::max(std::abs(worst.lo), std::abs(worst.hi)), -45)) break;
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left = kronrod_panel(pieces[worst.piece], worst.lo, mid);
    Panel right = kronrod_panel(pieces[worst.piece], mid, worst.hi);
    left.piece = right.piece = worst.piece;
    total.value += left.estimate.value + right.estimate.value - worst.estimate.value;
    total.error += left.estimate.error + right.estimate.error - worst.estimate.error;
    total.l1 += left.estimate.l1 + right.estimate.l1 - worst.estimate.l1;
    panels.push(left);
    panels.push(right);
    if (panels.size() % 1024 == 0) total = totals();
  }
  total = totals();
  if (!(total.error <= options.abs_tolerance + options.rel_tolerance * total.l1)) {
    throw Error(ErrorKind::QuadratureFailure,
                "error estimate " + std::to_string(total.error) + " exceeds tolerance");
  }
  return total;
}

WeightedNodes density_rule(const Integrand& f, double a, double b,
                           std::span<const double> singular_points,
                           std::span<const double> breakpoints, double max_frequency) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  const double freq = std::max(1.0, max_frequency);
  const double max_width = std::min(std::numbers::pi / 64.0, std::numbers::pi / freq);

  WeightedNodes rule;
  // Appends a Gauss-Legendre panel; returns its mass.
  auto panel = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double mass = 0.0;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      for (double sign : {-1.0, 1.0}) {
        if (abscissa[i] == 0.0 && sign > 0) continue;
        const double x = mid + sign * half * abscissa[i];
        const double w = half * weights[i] * f(x);
        if (!std::isfinite(w)) {
          throw Error(ErrorKind::NonIntegrableDensity, "non-finite density at x = " + std::to_string(x));
        }
        rule.x.push_back(x);
        rule.w.push_back(w);
        mass += w;
      }
    }
    return mass;
  };
  auto split_panel = [&](double lo, double hi) {
    const auto pieces = static_cast<int>(std::ceil((hi - lo) / max_width));
    double mass = 0.0;
    for (int k = 0; k < pieces; ++k) {
      mass += panel(lo + (hi - lo) * k / pieces, lo + (hi - lo) * (k + 1) / pieces);
    }
    return mass;
  };

  for (const Segment& seg : split(a, b, singular_points, breakpoints)) {
    if (!seg.singular_lo && !seg.singular_hi) {
      split_panel(seg.lo, seg.hi);
      continue;
    }
    const double s = seg.singular_lo ? seg.lo : seg.hi;
    const double t = seg.singular_lo ? seg.hi : seg.lo;
    const double direction = t > s ? 1.0 : -1.0;
    const double inner = std::min(std::abs(t - s), max_width);
    const SingularMap map{s, direction, inner};
    const double top = map.u_max();
    double mass = 0.0;
    double innermost = 0.0;
    constexpr int kDepth = 48;
    for (int j = 0; j <= kDepth; ++j) {
      const double hi = std::ldexp(top, -j);
      const double lo = j == kDepth ? 0.0 : std::ldexp(top, -(j + 1));
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      double panel_mass = 0.0;
      for (std::size_t i = 0; i < abscissa.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
          if (abscissa[i] == 0.0 && sign > 0) continue;
          const double u = mid + sign * half * abscissa[i];
          const double x = map.x(u);
          const double w = half * weights[i] * map.jacobian(u) * f(x);
          if (!std::isfinite(w)) {
            throw Error(ErrorKind::NonIntegrableDensity, "non-finite density at x = " + std::to_string(x));
          }
          rule.x.push_back(x);
          rule.w.push_back(w);
          panel_mass += w;
        }
      }
      mass += std::abs(panel_mass);
      if (j == kDepth) innermost = std::abs(panel_mass);
    }
    if (innermost > 1e-12 * mass) {
      throw Error(ErrorKind::NonIntegrableDensity,
                  "density mass does not vanish toward singular point " + std::to_string(s));
    }
    if (std::abs(t - s) > inner) {
      const double from = s + direction * inner;
      split_panel(std::min(from, t), std::max(from, t));
    }
  }
  return rule;
}

}  // namespace skewerg::quad
