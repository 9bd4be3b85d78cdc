#include "mdcsim/kernels.hpp"

namespace mdcsim::kernels {

namespace {

using NearestFn = std::size_t (*)(double, double, const double*, const double*, std::size_t);

NearestFn pick_nearest() {
#if defined(MDCSIM_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) return &nearest_point_avx2;
#endif
    return &nearest_point_scalar;
}

const NearestFn g_nearest = pick_nearest();

}  // namespace

const char* active_backend() {
#if defined(MDCSIM_HAVE_AVX2)
    if (g_nearest == &nearest_point_avx2) return "avx2";
#endif
    return "scalar";
}

std::size_t nearest_point(double px, double py,
                          const double* xs, const double* ys, std::size_t n) {
    return g_nearest(px, py, xs, ys, n);
}

double assign_points(const double* xs, const double* ys, const double* w,
                     std::size_t n,
                     const double* cx, const double* cy, std::size_t k,
                     std::uint32_t* labels) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = g_nearest(xs[i], ys[i], cx, cy, k);
        labels[i] = static_cast<std::uint32_t>(c);
        const double dx = cx[c] - xs[i];
        const double dy = cy[c] - ys[i];
        inertia += w[i] * (dx * dx + dy * dy);
    }
    return inertia;
}

}  // namespace mdcsim::kernels
