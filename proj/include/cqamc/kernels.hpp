#pragma once

// Data-parallel kernels with a serial reference path. Work is split over
// independent outputs only, so both paths produce bitwise-identical results.

#include <cstddef>
#include <span>
#include <vector>

#include "cqamc/types.hpp"

namespace cqamc {

enum class Exec { serial, parallel };

/// c_k = sum_j w_j gamma_k(x_j) for k < terms.
std::vector<double> cosine_projection(std::span<const double> x, std::span<const double> w, const Interval& iv,
                                      std::size_t terms, Exec exec = Exec::parallel);

/// sum_k a_k gamma_k(x) at every x (x inside iv).
std::vector<double> cosine_eval(std::span<const double> coeffs, const Interval& iv, std::span<const double> x,
                                Exec exec = Exec::parallel);

/// sum_k a_k Gamma_k(x) at every x; 0 below iv, 1 at or above iv.b.
std::vector<double> cosine_eval_cdf(std::span<const double> coeffs, const Interval& iv, std::span<const double> x,
                                    Exec exec = Exec::parallel);

/// out[j] = f(j) for j < n.
template <class F>
void parallel_fill(std::vector<double>& out, std::size_t n, F&& f, Exec exec = Exec::parallel) {
  out.resize(n);
  if (exec == Exec::serial) {
    for (std::size_t j = 0; j < n; ++j) out[j] = f(j);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) out[j] = f(j);
}

}  // namespace cqamc
