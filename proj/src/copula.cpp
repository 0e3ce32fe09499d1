#include "cqamc/copula.hpp"

#include <algorithm>
#include <cmath>

#include "cqamc/errors.hpp"
#include "cqamc/numerics.hpp"

namespace cqamc {
namespace {

// Visits every multi-index of the product grid, last dimension fastest.
template <class F>
void for_each_node(const std::vector<std::size_t>& sizes, F&& f) {
  if (sizes.empty()) return;
  for (std::size_t s : sizes)
    if (s == 0) return;
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (;;) {
    f(idx);
    std::size_t d = sizes.size();
    for (;;) {
      --d;
      if (++idx[d] < sizes[d]) break;
      idx[d] = 0;
      if (d == 0) return;
    }
  }
}

double clamp_u(double u, std::size_t* clamped) {
  const double v = std::clamp(u, kUClamp, 1.0 - kUClamp);
  if (clamped && v != u) ++*clamped;
  return v;
}

std::vector<std::vector<double>> normal_scores(const std::vector<std::vector<double>>& u_nodes) {
  std::vector<std::vector<double>> z(u_nodes.size());
  for (std::size_t i = 0; i < u_nodes.size(); ++i)
    for (double u : u_nodes[i]) z[i].push_back(std_normal_quantile(clamp_u(u, nullptr)));
  return z;
}

std::vector<std::size_t> sizes_of(const std::vector<std::vector<double>>& nodes) {
  std::vector<std::size_t> s;
  for (const auto& v : nodes) s.push_back(v.size());
  return s;
}

}  // namespace

bool CopulaSpec::is_identity() const { return sigma.isIdentity(0.0); }

CopulaSpec CopulaSpec::from_matrix(const Eigen::MatrixXd& sigma, std::vector<std::string> assets) {
  const auto n = sigma.rows();
  if (n == 0 || sigma.cols() != n) throw ValidationError("correlation matrix must be square and non-empty");
  if (!assets.empty() && assets.size() != static_cast<std::size_t>(n))
    throw ValidationError("correlation matrix size does not match the asset list");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(sigma(i, i) - 1.0) > 1e-12) throw ValidationError("correlation matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12) throw ValidationError("correlation matrix must be symmetric");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ValidationError("correlation matrix is not positive definite");
  CopulaSpec s;
  s.assets = std::move(assets);
  s.sigma = sigma;
  s.chol = llt.matrixL();
  s.inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const double log_det = 2.0 * s.chol.diagonal().array().log().sum();
  s.det = std::exp(log_det);
  if (!(s.det > 0.0)) throw ValidationError("correlation matrix is numerically singular");
  return s;
}

CopulaSpec CopulaSpec::identity(std::size_t n) {
  return from_matrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

double gaussian_copula_density_z(std::span<const double> z, const CopulaSpec& spec) {
  if (z.size() != spec.dim()) throw DomainError("copula density: dimension mismatch");
  if (spec.is_identity()) return 1.0;
  const Eigen::Map<const Eigen::VectorXd> v(z.data(), static_cast<Eigen::Index>(z.size()));
  const double q = v.dot(spec.inv * v) - v.squaredNorm();
  return std::exp(-0.5 * q) / std::sqrt(spec.det);
}

double gaussian_copula_density(std::span<const double> u, const CopulaSpec& spec) {
  std::vector<double> z(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0)) throw DomainError("copula density: u must lie in (0, 1)");
    z[i] = std_normal_quantile(u[i]);
  }
  return gaussian_copula_density_z(z, spec);
}

double copula_density_clamped(std::span<const double> u, const CopulaSpec& spec, std::size_t* clamped) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = clamp_u(u[i], clamped);
  return gaussian_copula_density(v, spec);
}

double joint_pdf(std::span<const double> x, std::span<const CosineSeries> marginals, const CopulaSpec& spec) {
  if (x.size() != marginals.size() || x.size() != spec.dim()) throw DomainError("joint_pdf: dimension mismatch");
  std::vector<double> u(x.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    prod *= eval_pdf(marginals[i], x[i]);
    u[i] = eval_cdf(marginals[i], x[i]);
  }
  return copula_density_clamped(u, spec) * prod;
}

double adjusted_payoff(std::span<const double> x, double h, std::span<const CosineSeries> marginals,
                       const CopulaSpec& spec) {
  if (x.size() != marginals.size() || x.size() != spec.dim()) throw DomainError("adjusted_payoff: dimension mismatch");
  if (!(h >= 0.0 && h <= 1.0)) throw DomainError("adjusted_payoff: payoff must be scaled to [0, 1]");
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = eval_cdf(marginals[i], x[i]);
  const double c = copula_density_clamped(u, spec);
  if (c > spec.c_max * (1.0 + 1e-12)) throw DomainError("adjusted_payoff: copula density exceeds c_max (stale bound)");
  return h * c / spec.c_max;
}

double grid_c_max(const CopulaSpec& spec, const std::vector<std::vector<double>>& u_nodes) {
  if (u_nodes.size() != spec.dim()) throw DomainError("grid_c_max: dimension mismatch");
  if (spec.is_identity()) return 1.0;
  const auto z = normal_scores(u_nodes);
  double best = 0.0;
  std::vector<double> point(z.size());
  for_each_node(sizes_of(z), [&](const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) point[i] = z[i][idx[i]];
    best = std::max(best, gaussian_copula_density_z(point, spec));
  });
  return best > 1.0 ? 1.01 * best : best;
}

double grid_c_prime_max(const CopulaSpec& spec, const std::vector<std::vector<double>>& u_nodes) {
  if (u_nodes.size() != spec.dim()) throw DomainError("grid_c_prime_max: dimension mismatch");
  if (spec.is_identity()) return 0.0;
  const auto z = normal_scores(u_nodes);
  double best = 0.0;
  std::vector<double> here(z.size());
  std::vector<double> next(z.size());
  for_each_node(sizes_of(z), [&](const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) here[i] = z[i][idx[i]];
    const double c0 = gaussian_copula_density_z(here, spec);
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] + 1 >= z[d].size()) continue;
      const double du = u_nodes[d][idx[d] + 1] - u_nodes[d][idx[d]];
      if (!(du > 0.0)) continue;
      next = here;
      next[d] = z[d][idx[d] + 1];
      best = std::max(best, std::abs(gaussian_copula_density_z(next, spec) - c0) / du);
    }
  });
  return best;
}

}  // namespace cqamc
