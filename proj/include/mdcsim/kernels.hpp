#ifndef MDCSIM_KERNELS_HPP
#define MDCSIM_KERNELS_HPP

#include <cstddef>
#include <cstdint>

namespace mdcsim::kernels {

// Inner loops for nearest-point scans over SoA coordinate arrays. A scalar
// reference implementation always exists; on x86-64 an AVX2 variant is
// selected at runtime. Both compute squared distances with the same IEEE
// operation order (no FMA contraction), so their results are identical,
// including the lowest-index tie-break.

/// Index of the candidate minimizing squared Euclidean distance to (px, py).
/// Ties resolve to the lowest index. n must be >= 1.
std::size_t nearest_point_scalar(double px, double py,
                                 const double* xs, const double* ys, std::size_t n);

#if defined(MDCSIM_HAVE_AVX2)
std::size_t nearest_point_avx2(double px, double py,
                               const double* xs, const double* ys, std::size_t n);
#endif

/// Runtime-dispatched variant.
std::size_t nearest_point(double px, double py,
                          const double* xs, const double* ys, std::size_t n);

/// Assign every point to its nearest centroid; labels[i] receives the
/// centroid index, the return value is the weighted inertia
/// sum_i w[i] * d^2(p_i, c_label[i]). Accumulation runs point-by-point in
/// index order regardless of backend, so results are backend-independent.
double assign_points_scalar(const double* xs, const double* ys, const double* w,
                            std::size_t n,
                            const double* cx, const double* cy, std::size_t k,
                            std::uint32_t* labels);

double assign_points(const double* xs, const double* ys, const double* w,
                     std::size_t n,
                     const double* cx, const double* cy, std::size_t k,
                     std::uint32_t* labels);

/// Name of the backend chosen at runtime ("scalar" or "avx2").
const char* active_backend();

}  // namespace mdcsim::kernels

#endif
