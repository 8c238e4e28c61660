#include "find/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>


namespace find {

std::string_view form_name(TemplateForm f) {
  switch (f) {
    case TemplateForm::Power: return "a*z^q";
    case TemplateForm::AffinePower: return "a+b*z^q";
    case TemplateForm::Sin: return "a*sin(b*z)";
    case TemplateForm::Cos: return "a*cos(b*z)";
    case TemplateForm::Exp: return "a*exp(b*z)";
    case TemplateForm::Log: return "a*ln(b*z)";
    case TemplateForm::Atan: return "a*atan(b*z)";
    case TemplateForm::SqrtShift: return "a*sqrt(b+z^2)";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inner(TemplateForm f, double b, double z) {
  switch (f) {
    case TemplateForm::Sin: return std::sin(b * z);
    case TemplateForm::Cos: return std::cos(b * z);
    case TemplateForm::Exp: return std::exp(b * z);
    case TemplateForm::Log: return std::log(b * z);
    case TemplateForm::Atan: return std::atan(b * z);
    case TemplateForm::SqrtShift: return std::sqrt(b + z * z);
    default: return std::nan("");
  }
}

double r2_of(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (!yhat.allFinite()) return -kInf;
  const double m = y.mean();
  const double tot = (y.array() - m).square().sum();
  if (!(tot > 0)) return -kInf;
  return 1.0 - (y - yhat).squaredNorm() / tot;
}

// Least squares y ≈ a·g (no intercept); returns a and the fit.
double scale_fit(const Eigen::VectorXd& g, const Eigen::VectorXd& y, Eigen::VectorXd& yhat) {
  const double den = g.squaredNorm();
  const double a = den > 0 ? g.dot(y) / den : 0.0;
  yhat = a * g;
  return a;
}

struct Scan {
  double b = 0.0;
  double a = 0.0;
  double r2 = -kInf;
};

Scan fit_scaled(TemplateForm f, double b, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) g(i) = inner(f, b, z(i));
  Scan s;
  s.b = b;
  if (!g.allFinite()) return s;
  Eigen::VectorXd yhat;
  s.a = scale_fit(g, y, yhat);
  s.r2 = r2_of(y, yhat);
  return s;
}

// Grid over t, golden-section refinement between the best point's neighbours.
Scan scan_and_refine(const std::vector<double>& grid, const std::function<Scan(double)>& at) {
  std::vector<Scan> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = at(grid[i]);
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (vals[i].r2 > vals[best].r2) best = i;
  }
  if (!std::isfinite(vals[best].r2)) return vals[best];
  double lo = grid[best > 0 ? best - 1 : best];
  double hi = grid[best + 1 < grid.size() ? best + 1 : best];
  Scan top = vals[best];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  Scan f1 = at(x1), f2 = at(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * (1.0 + std::fabs(lo)); ++it) {
    if (f1.r2 >= f2.r2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = at(x2);
    }
  }
  for (const Scan& s : {f1, f2}) {
    if (s.r2 > top.r2) top = s;
  }
  return top;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

Expr build(TemplateForm f, const std::vector<double>& p, const Expr& z) {
  auto zq = [&](double q) { return q == 1.0 ? z : pow(z, constant(q)); };
  switch (f) {
    case TemplateForm::Power: return mul(constant(p[0]), zq(p[1]));
    case TemplateForm::AffinePower: {
      Expr term = mul(constant(p[1]), zq(p[2]));
      return p[0] == 0.0 ? term : add(std::move(term), constant(p[0]));
    }
    case TemplateForm::SqrtShift:
      return mul(constant(p[0]), apply(Op::Sqrt, add(constant(p[1]), pow(z, constant(2.0)))));
    default: {
      const Op op = f == TemplateForm::Sin   ? Op::Sin
                    : f == TemplateForm::Cos ? Op::Cos
                    : f == TemplateForm::Exp ? Op::Exp
                    : f == TemplateForm::Log ? Op::Log
                                             : Op::Atan;
      return mul(constant(p[0]), apply(op, mul(constant(p[1]), z)));
    }
  }
}

}  // namespace

double Template::eval(double z) const {
  switch (form) {
    case TemplateForm::Power: return params[0] * std::pow(z, params[1]);
    case TemplateForm::AffinePower: return params[0] + params[1] * std::pow(z, params[2]);
    default: return params[0] * inner(form, params[1], z);
  }
}

std::vector<Template> fit_templates(const Eigen::VectorXd& z, const Eigen::VectorXd& y, const Expr& latent) {
  std::vector<Template> out;
  std::vector<double> qs;
  for (int k = -6; k <= 6; ++k) {
    if (k != 0) qs.push_back(0.5 * k);
  }

  // a·z^q and a + b·z^q over the q lattice.
  {
    Template best_p, best_a;
    best_p.form = TemplateForm::Power;
    best_a.form = TemplateForm::AffinePower;
    best_p.r2 = best_a.r2 = -kInf;
    for (double q : qs) {
      Eigen::VectorXd g(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) g(i) = std::pow(z(i), q);
      if (!g.allFinite()) continue;
      Eigen::VectorXd yhat;
      const double a = scale_fit(g, y, yhat);
      const double r2 = r2_of(y, yhat);
      if (r2 > best_p.r2) {
        best_p.r2 = r2;
        best_p.params = {a, q};
      }
      Eigen::MatrixXd A(z.size(), 2);
      A.col(0).setOnes();
      A.col(1) = g;
      const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
      const double r2a = r2_of(y, A * c);
      if (r2a > best_a.r2) {
        best_a.r2 = r2a;
        best_a.params = {c(0), c(1), q};
      }
    }
    for (Template* t : {&best_p, &best_a}) {
      if (t->params.empty()) continue;
      out.push_back(*t);
    }
  }

  double zscale = z.cwiseAbs().maxCoeff();
  if (!(zscale > 0)) zscale = 1.0;
  const double zmin2 = z.cwiseAbs2().minCoeff();
  const bool all_pos = (z.array() > 0).all();
  const bool all_neg = (z.array() < 0).all();

  struct Nonlinear {
    TemplateForm form;
    std::vector<double> signs;
  };
  const std::vector<Nonlinear> forms = {
      {TemplateForm::Sin, {1.0}}, {TemplateForm::Cos, {1.0}}, {TemplateForm::Exp, {1.0, -1.0}},
      {TemplateForm::Log, {}},    {TemplateForm::Atan, {1.0}},
  };
  const auto grid = linspace(-2.0, 2.0, 161);  // log10 of b·zscale
  for (const auto& nl : forms) {
    std::vector<double> signs = nl.signs;
    if (nl.form == TemplateForm::Log) {
      if (all_pos) signs = {1.0};
      else if (all_neg) signs = {-1.0};
      else continue;
    }
    Scan best;
    for (double sgn : signs) {
      auto at = [&](double t) { return fit_scaled(nl.form, sgn * std::pow(10.0, t) / zscale, z, y); };
      Scan s = scan_and_refine(grid, at);
      if (s.r2 > best.r2) best = s;
    }
    if (!std::isfinite(best.r2)) continue;
    Template t;
    t.form = nl.form;
    t.params = {best.a, best.b};
    t.r2 = best.r2;
    out.push_back(std::move(t));
  }

  // a·√(b + z²): b = −min z² + 10^t·zscale².
  {
    auto at = [&](double t) {
      return fit_scaled(TemplateForm::SqrtShift, -zmin2 + std::pow(10.0, t) * zscale * zscale, z, y);
    };
    Scan s = scan_and_refine(linspace(-6.0, 3.0, 181), at);
    if (std::isfinite(s.r2)) {
      Template t;
      t.form = TemplateForm::SqrtShift;
      t.params = {s.a, s.b};
      t.r2 = s.r2;
      out.push_back(std::move(t));
    }
  }

  for (auto& t : out) {
    t.expression = build(t.form, t.params, latent);
    t.complexity = complexity(t.expression);
  }
  return out;
}

std::optional<Template> simplify(const Eigen::VectorXd& z, const Eigen::VectorXd& y, double baseline_r2,
                                 const Expr& latent, const SimplifyOptions& options) {
  std::optional<Template> best;
  for (auto& t : fit_templates(z, y, latent)) {
    if (!(t.r2 >= baseline_r2 - options.tolerance)) continue;
    if (options.max_complexity && t.complexity > *options.max_complexity) continue;
    if (!best || t.complexity < best->complexity ||
        (t.complexity == best->complexity && t.r2 > best->r2)) {
      best = t;
    }
  }
  return best;
}

std::string render(const Template& t, const std::string& output, int digits) {
  return output + " = " + render_text(t.expression, digits);
}

}  // namespace find
