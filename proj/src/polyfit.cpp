#include "find/polyfit.hpp"

#include <cmath>
#include <map>

namespace find {

namespace {

void enumerate(std::size_t s, int remaining, std::size_t pos, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
  if (pos + 1 == s) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[pos] = k;
    enumerate(s, remaining - k, pos + 1, cur, out);
  }
}

Eigen::MatrixXd design(const Eigen::MatrixXd& U, const std::vector<MultiIndex>& terms, int degree) {
  const Eigen::Index b = U.rows();
  const Eigen::Index s = U.cols();
  // powers[i](r, k) = U(r, i)^k
  std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) {
    auto& P = powers[static_cast<std::size_t>(i)];
    P.resize(b, degree + 1);
    P.col(0).setOnes();
    for (int k = 1; k <= degree; ++k) P.col(k) = P.col(k - 1).cwiseProduct(U.col(i));
  }
  Eigen::MatrixXd A(b, static_cast<Eigen::Index>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    auto col = A.col(static_cast<Eigen::Index>(t));
    col.setOnes();
    for (Eigen::Index i = 0; i < s; ++i) {
      const int k = terms[t][static_cast<std::size_t>(i)];
      if (k > 0) col = col.cwiseProduct(powers[static_cast<std::size_t>(i)].col(k));
    }
  }
  return A;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<MultiIndex> monomials(std::size_t s, int degree) {
  std::vector<MultiIndex> out;
  if (s == 0) {
    out.push_back({});
    return out;
  }
  MultiIndex cur(s, 0);
  for (int n = 0; n <= degree; ++n) enumerate(s, n, 0, cur, out);
  return out;
}

Eigen::VectorXd PolynomialModel::predict(const Eigen::MatrixXd& Z) const {
  Eigen::MatrixXd U = Z;
  for (Eigen::Index i = 0; i < U.cols(); ++i) U.col(i) = (U.col(i).array() - mean(i)) / scale(i);
  const Eigen::MatrixXd A = design(U, terms, degree);
  return A * Eigen::Map<const Eigen::VectorXd>(std_coefficients.data(),
                                               static_cast<Eigen::Index>(std_coefficients.size()));
}

double PolynomialModel::coefficient(const MultiIndex& k) const {
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (terms[t] == k) return coefficients[t];
  }
  return 0.0;
}

Expr PolynomialModel::to_expr(const std::vector<Expr>& latents) const {
  Expr sum;
  bool have = false;
  // Non-constant terms first, the intercept last.
  for (std::size_t n = 0; n < terms.size(); ++n) {
    const std::size_t t = (n + 1) % terms.size();
    const double a = coefficients[t];
    if (a == 0.0) continue;
    Expr prod;
    bool have_prod = false;
    for (std::size_t i = 0; i < terms[t].size(); ++i) {
      const int k = terms[t][i];
      if (k == 0) continue;
      Expr f = k == 1 ? latents[i] : pow(latents[i], constant(k));
      prod = have_prod ? mul(std::move(prod), std::move(f)) : std::move(f);
      have_prod = true;
    }
    Expr term = have_prod ? mul(constant(a), std::move(prod)) : constant(a);
    sum = have ? add(std::move(sum), std::move(term)) : std::move(term);
    have = true;
  }
  return have ? sum : constant(0.0);
}

PolyFit fit_poly(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int degree) {
  if (degree < 0) throw PolyfitError("negative polynomial degree");
  if (Z.rows() != y.size()) throw PolyfitError("latent/output row mismatch");
  if (!Z.allFinite() || !y.allFinite()) throw PolyfitError("non-finite latent or output values");
  const Eigen::Index s = Z.cols();

  PolyFit fit;
  PolynomialModel& m = fit.model;
  m.degree = degree;
  m.terms = monomials(static_cast<std::size_t>(s), degree);
  m.mean.resize(s);
  m.scale.resize(s);
  Eigen::MatrixXd U = Z;
  for (Eigen::Index i = 0; i < s; ++i) {
    const double mu = Z.col(i).mean();
    const double sd = std::sqrt((Z.col(i).array() - mu).square().mean());
    m.mean(i) = mu;
    m.scale(i) = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
    U.col(i) = (Z.col(i).array() - mu) / m.scale(i);
  }

  const Eigen::MatrixXd A = design(U, m.terms, degree);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  const Eigen::VectorXd c = cod.solve(y);
  fit.report.rank = static_cast<std::size_t>(cod.rank());
  fit.report.rank_deficient = fit.report.rank < m.terms.size();
  if (cod.rank() > 0) {
    const auto R = cod.matrixQTZ().topLeftCorner(cod.rank(), cod.rank()).diagonal().cwiseAbs();
    fit.report.condition_warning = R.maxCoeff() > 1e10 * R.minCoeff();
  }
  m.std_coefficients.assign(c.data(), c.data() + c.size());

  // Fold standardization back: Π ((z_i − m_i)/s_i)^{k_i} expanded binomially.
  std::map<MultiIndex, double> raw;
  for (std::size_t t = 0; t < m.terms.size(); ++t) {
    const double ct = c(static_cast<Eigen::Index>(t));
    if (ct == 0.0) continue;
    std::vector<std::pair<MultiIndex, double>> parts{{MultiIndex(static_cast<std::size_t>(s), 0), ct}};
    for (Eigen::Index i = 0; i < s; ++i) {
      const int k = m.terms[t][static_cast<std::size_t>(i)];
      if (k == 0) continue;
      std::vector<std::pair<MultiIndex, double>> next;
      for (const auto& [idx, coef] : parts) {
        for (int j = 0; j <= k; ++j) {
          auto nidx = idx;
          nidx[static_cast<std::size_t>(i)] = j;
          const double f = binomial(k, j) * std::pow(-m.mean(i), k - j) / std::pow(m.scale(i), k);
          next.emplace_back(std::move(nidx), coef * f);
        }
      }
      parts = std::move(next);
    }
    for (const auto& [idx, coef] : parts) raw[idx] += coef;
  }
  m.coefficients.resize(m.terms.size());
  for (std::size_t t = 0; t < m.terms.size(); ++t) {
    auto it = raw.find(m.terms[t]);
    m.coefficients[t] = it == raw.end() ? 0.0 : it->second;
  }

  const Eigen::VectorXd y_hat = A * c;
  const double mean_y = y.mean();
  const double ss_tot = (y.array() - mean_y).square().sum();
  const double ss_res = (y - y_hat).squaredNorm();
  fit.report.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw PolyfitError("length mismatch");
  if (y.size() < 2) throw PolyfitError("need at least 2 observations");
  const double mean_y = y.mean();
  const double ss_tot = (y.array() - mean_y).square().sum();
  if (!(ss_tot > 0.0)) throw PolyfitError("R² undefined for constant y");
  return 1.0 - (y - y_hat).squaredNorm() / ss_tot;
}

}  // namespace find
