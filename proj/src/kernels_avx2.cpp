#include "mdcsim/kernels.hpp"

#include <immintrin.h>

namespace mdcsim::kernels {

std::size_t nearest_point_avx2(double px, double py,
                               const double* xs, const double* ys, std::size_t n) {
    if (n < 8) return nearest_point_scalar(px, py, xs, ys, n);

    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    __m256d best_d = _mm256_set1_pd(__builtin_inf());
    __m256d best_i = _mm256_setzero_pd();
    __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d four = _mm256_set1_pd(4.0);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy);
        const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        // Strict less-than keeps the earliest index within each lane stream.
        const __m256d lt = _mm256_cmp_pd(d, best_d, _CMP_LT_OQ);
        best_d = _mm256_blendv_pd(best_d, d, lt);
        best_i = _mm256_blendv_pd(best_i, idx, lt);
        idx = _mm256_add_pd(idx, four);
    }

    alignas(32) double lane_d[4];
    alignas(32) double lane_i[4];
    _mm256_store_pd(lane_d, best_d);
    _mm256_store_pd(lane_i, best_i);

    // Lanes interleave indices mod 4, so the cross-lane reduction must
    // compare (distance, index) lexicographically to honor the tie-break.
    std::size_t best = static_cast<std::size_t>(lane_i[0]);
    double bd = lane_d[0];
    for (int l = 1; l < 4; ++l) {
        const std::size_t li = static_cast<std::size_t>(lane_i[l]);
        if (lane_d[l] < bd || (lane_d[l] == bd && li < best)) {
            bd = lane_d[l];
            best = li;
        }
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - px;
        const double dy = ys[i] - py;
        const double d = dx * dx + dy * dy;
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

}  // namespace mdcsim::kernels
