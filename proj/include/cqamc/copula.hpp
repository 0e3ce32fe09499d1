#pragma once

// Gaussian copula density, joint density from marginals, and the
// copula-weighted payoff of the independent formulation.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cqamc/cosine_density.hpp"

namespace cqamc {

struct CopulaSpec {
  std::vector<std::string> assets;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd inv;
  Eigen::MatrixXd chol;  // lower factor, sigma = chol * chol^T
  double det = 1.0;
  double c_max = 1.0;        // grid-level bound, see grid_c_max
  double c_prime_max = 0.0;  // grid-level partial-derivative bound

  std::size_t dim() const { return static_cast<std::size_t>(sigma.rows()); }
  bool is_identity() const;

  /// Validates symmetry, unit diagonal and positive definiteness (Cholesky).
  static CopulaSpec from_matrix(const Eigen::MatrixXd& sigma, std::vector<std::string> assets = {});
  static CopulaSpec identity(std::size_t n);
};

/// Probabilities fed to the normal quantile are clamped to [kUClamp, 1 - kUClamp].
inline constexpr double kUClamp = 1e-12;

/// (1/sqrt(det)) exp(-z^T (inv - I) z / 2), z_i = Phi^{-1}(u_i). Domain error unless 0 < u_i < 1.
double gaussian_copula_density(std::span<const double> u, const CopulaSpec& spec);

/// Same from precomputed normal scores.
double gaussian_copula_density_z(std::span<const double> z, const CopulaSpec& spec);

/// Clamps u into [kUClamp, 1 - kUClamp] first; `clamped` counts adjusted entries.
double copula_density_clamped(std::span<const double> u, const CopulaSpec& spec, std::size_t* clamped = nullptr);

/// c(F_1(x_1), ..., F_N(x_N)) prod f_i(x_i) with cosine-series marginals.
double joint_pdf(std::span<const double> x, std::span<const CosineSeries> marginals, const CopulaSpec& spec);

/// h c(F(x)) / c_max for h already scaled to [0, 1]. Domain error when the
/// copula value exceeds spec.c_max (stale bound).
double adjusted_payoff(std::span<const double> x, double h, std::span<const CosineSeries> marginals,
                       const CopulaSpec& spec);

/// Max of c over the product of per-dimension CDF values (u_nodes[i][j] =
/// F_i at node j), times 1.01 when it exceeds 1. Identity correlation gives 1.
double grid_c_max(const CopulaSpec& spec, const std::vector<std::vector<double>>& u_nodes);

/// Largest |dc/du_i| by forward differences between neighbouring grid nodes.
double grid_c_prime_max(const CopulaSpec& spec, const std::vector<std::vector<double>>& u_nodes);

}  // namespace cqamc
