#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "find/expr.hpp"

namespace find {

enum class TemplateForm { Power, AffinePower, Sin, Cos, Exp, Log, Atan, SqrtShift };

std::string_view form_name(TemplateForm f);

struct Template {
  TemplateForm form = TemplateForm::Power;
  std::vector<double> params;  // Power: a,q  AffinePower: a,b,q  others: a,b
  double r2 = 0.0;
  std::size_t complexity = 0;
  Expr expression;  // in terms of the latent expression

  double eval(double z) const;
};

struct SimplifyOptions {
  double tolerance = 0.001;  // accepted R² drop below the baseline
  std::optional<std::size_t> max_complexity;
};

/// Every template fitted to (z, y), in form order.
std::vector<Template> fit_templates(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                    const Expr& latent);

/// Lowest-complexity template with r2 ≥ baseline − tolerance, or none.
std::optional<Template> simplify(const Eigen::VectorXd& z, const Eigen::VectorXd& y, double baseline_r2,
                                 const Expr& latent = variable(0, "z"),
                                 const SimplifyOptions& options = {});

/// `y = <expr>` text.
std::string render(const Template& t, const std::string& output = "y", int digits = 6);

}  // namespace find
