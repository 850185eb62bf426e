#include "hamiter/corpus.hpp"

#include <cmath>
#include <numbers>

namespace hamiter {

namespace {

constexpr double kPi = std::numbers::pi;

using F2 = std::function<double(double, double)>;
using G2 = std::function<Eigen::Vector2d(double, double)>;
using H2 = std::function<Eigen::Matrix2d(double, double)>;

HamiltonianGerm planar(std::string name, double radius, F2 f, G2 g, H2 hs) {
  HamiltonianGerm h;
  h.name = std::move(name);
  h.n = 1;
  h.domain = Box::cube(2, radius);
  h.autonomous = true;
  h.h = [f](double, const Vec& z) { return f(z[0], z[1]); };
  h.grad = [g](double, const Vec& z) { return Vec(g(z[0], z[1])); };
  h.hess = [hs](double, const Vec& z) { return Mat(hs(z[0], z[1])); };
  return h;
}

// H = c·(x² + y²)/2.
HamiltonianGerm quadratic(std::string name, double c, double radius) {
  return planar(
      std::move(name), radius, [c](double x, double y) { return 0.5 * c * (x * x + y * y); },
      [c](double x, double y) { return Eigen::Vector2d(c * x, c * y); },
      [c](double, double) { return Eigen::Matrix2d(c * Eigen::Matrix2d::Identity()); });
}

HamiltonianGerm rotation_germ(double alpha) { return quadratic("rotation", -2 * kPi * alpha, 1.0); }

HamiltonianGerm hyperbolic_germ(double lambda) {
  const double l = std::log(lambda);
  return planar(
      "hyperbolic", 1.0, [l](double x, double y) { return l * x * y; },
      [l](double x, double y) { return Eigen::Vector2d(l * y, l * x); },
      [l](double, double) {
        Eigen::Matrix2d m;
        m << 0, l, l, 0;
        return m;
      });
}

// H = s·(x⁴ + y⁴)/4.
HamiltonianGerm quartic(std::string name, double s) {
  return planar(
      std::move(name), 2.0, [s](double x, double y) { return 0.25 * s * (x * x * x * x + y * y * y * y); },
      [s](double x, double y) { return Eigen::Vector2d(s * x * x * x, s * y * y * y); },
      [s](double x, double y) {
        Eigen::Matrix2d m;
        m << 3 * s * x * x, 0, 0, 3 * s * y * y;
        return m;
      });
}

double param(const Params& p, const std::string& key) { return p.at(key); }

std::vector<CorpusEntry> build() {
  std::vector<CorpusEntry> c;
  c.push_back({"zero", "H = 0", 1, {}, [](const Params&) { return quadratic("zero", 0.0, 1.0); }});
  c.push_back({"rotation", "H = -pi*alpha*(x^2+y^2)", 1, {{"alpha", 0.3183}},
               [](const Params& p) { return rotation_germ(param(p, "alpha")); }});
  c.push_back({"nondeg-max", "H = -a*(x^2+y^2)/2", 1, {{"a", 0.5}},
               [](const Params& p) { return quadratic("nondeg-max", -param(p, "a"), 1.0); }});
  c.push_back({"nondeg-min", "H = a*(x^2+y^2)/2", 1, {{"a", 0.5}},
               [](const Params& p) { return quadratic("nondeg-min", param(p, "a"), 1.0); }});
  c.push_back({"hyperbolic", "H = ln(lambda)*x*y", 1, {{"lambda", 2.0}},
               [](const Params& p) { return hyperbolic_germ(param(p, "lambda")); }});
  c.push_back({"negative-hyperbolic", "hyperbolic(lambda) # rotation(1/2)", 1, {{"lambda", 2.0}},
               [](const Params& p) {
                 auto g = compose(hyperbolic_germ(param(p, "lambda")), rotation_germ(0.5));
                 g.name = "negative-hyperbolic";
                 return g;
               }});
  c.push_back({"shear", "H = y^2/2", 1, {}, [](const Params&) {
                 return planar(
                     "shear", 1.0, [](double, double y) { return 0.5 * y * y; },
                     [](double, double y) { return Eigen::Vector2d(0.0, y); },
                     [](double, double) {
                       Eigen::Matrix2d m;
                       m << 0, 0, 0, 1;
                       return m;
                     });
               }});
  c.push_back({"quartic-max", "H = -(x^4+y^4)/4", 1, {}, [](const Params&) { return quartic("quartic-max", -1.0); }});
  c.push_back({"quartic-min", "H = (x^4+y^4)/4", 1, {}, [](const Params&) { return quartic("quartic-min", 1.0); }});
  c.push_back({"monkey-saddle", "H = s*(x^3-3*x*y^2)", 1, {{"s", 1.0}}, [](const Params& p) {
                 const double s = param(p, "s");
                 return planar(
                     "monkey-saddle", 0.5, [s](double x, double y) { return s * (x * x * x - 3 * x * y * y); },
                     [s](double x, double y) { return Eigen::Vector2d(s * (3 * x * x - 3 * y * y), -6 * s * x * y); },
                     [s](double x, double y) {
                       Eigen::Matrix2d m;
                       m << 6 * s * x, -6 * s * y, -6 * s * y, -6 * s * x;
                       return m;
                     });
               }});
  c.push_back({"double-well", "H = eps*((x^4/4 - x^2/2) + y^2/2)", 1, {{"eps", 0.05}}, [](const Params& p) {
                 const double e = param(p, "eps");
                 return planar(
                     "double-well", 2.0,
                     [e](double x, double y) { return e * (0.25 * x * x * x * x - 0.5 * x * x + 0.5 * y * y); },
                     [e](double x, double y) { return Eigen::Vector2d(e * (x * x * x - x), e * y); },
                     [e](double x, double) {
                       Eigen::Matrix2d m;
                       m << e * (3 * x * x - 1), 0, 0, e;
                       return m;
                     });
               }});
  // Linear inside r² < s0, so the 2π/3 rotation is untouched near the origin and
  // every point there is 3-periodic; outside, the twist breaks periodicity.
  c.push_back({"radial-rotation", "H = -(pi/3)*r^2 + beta*max(0, r^2 - s0)^4", 1, {{"beta", 1.0}, {"s0", 0.04}},
               [](const Params& p) {
                 const double b = param(p, "beta"), s0 = param(p, "s0");
                 const double w = -kPi / 3;
                 return planar(
                     "radial-rotation", 1.0,
                     [=](double x, double y) {
                       double u = std::max(0.0, x * x + y * y - s0);
                       return w * (x * x + y * y) + b * u * u * u * u;
                     },
                     [=](double x, double y) {
                       double u = std::max(0.0, x * x + y * y - s0);
                       double f = 2 * w + 8 * b * u * u * u;  // d/dr² times 2
                       return Eigen::Vector2d(f * x, f * y);
                     },
                     [=](double x, double y) {
                       double u = std::max(0.0, x * x + y * y - s0);
                       double f = 2 * w + 8 * b * u * u * u;
                       double fp = 48 * b * u * u;  // 2·d f / d(r²)
                       Eigen::Matrix2d m;
                       m << f + fp * x * x, fp * x * y, fp * x * y, f + fp * y * y;
                       return m;
                     });
               }});
  c.push_back({"product-max-quartic", "nondeg-max(a) (+) quartic-max", 2, {{"a", 0.5}}, [](const Params& p) {
                 auto g = product_germ(quadratic("nondeg-max", -param(p, "a"), 2.0), quartic("quartic-max", -1.0));
                 g.name = "product-max-quartic";
                 return g;
               }});
  c.push_back({"product-quartic-quartic", "quartic-max (+) quartic-max", 2, {}, [](const Params&) {
                 auto g = product_germ(quartic("quartic-max", -1.0), quartic("quartic-max", -1.0));
                 g.name = "product-quartic-quartic";
                 return g;
               }});
  c.push_back({"product-rotation-hyperbolic", "rotation(alpha) (+) hyperbolic(lambda)", 2,
               {{"alpha", 0.3183}, {"lambda", 2.0}}, [](const Params& p) {
                 auto g = product_germ(rotation_germ(param(p, "alpha")), hyperbolic_germ(param(p, "lambda")));
                 g.name = "product-rotation-hyperbolic";
                 return g;
               }});
  return c;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = build();
  return entries;
}

const CorpusEntry& corpus_entry(const std::string& name) {
  for (const auto& e : corpus())
    if (e.name == name) return e;
  throw Error(Errc::UnknownFormula, "no corpus germ named '" + name + "'");
}

HamiltonianGerm make_germ(const std::string& name, const Params& overrides, double box_radius) {
  const CorpusEntry& e = corpus_entry(name);
  Params p = e.defaults;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw Error(Errc::InvalidArgument, "germ '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  HamiltonianGerm g = e.make(p);
  if (box_radius > 0) g.domain = Box::cube(2 * g.n, box_radius);
  return g;
}

}  // namespace hamiter
