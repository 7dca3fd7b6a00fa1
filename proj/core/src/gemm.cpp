#include "ctnet/gemm.hpp"

#include <algorithm>
#include <vector>

#include "ctnet/parallel.hpp"

namespace ctnet {

namespace {

// Panel width in floats. One packed B panel is K x NR and stays resident in
// cache while every row block of A streams against it.
constexpr int NR = 32;
constexpr int MR = 4;

// MR x NR register tile. k advances in plain ascending order so each output
// element accumulates exactly like the textbook triple loop.
template <int ROWS>
void micro_kernel(float* __restrict c, int ldc, const float* __restrict a, int lda,
                  const float* __restrict bp, int K, int nvalid, bool accumulate) {
    float acc[ROWS][NR];
    for (int i = 0; i < ROWS; ++i)
        for (int j = 0; j < NR; ++j) acc[i][j] = 0.0f;

    for (int k = 0; k < K; ++k) {
        const float* __restrict brow = bp + static_cast<std::size_t>(k) * NR;
        for (int i = 0; i < ROWS; ++i) {
            const float av = a[static_cast<std::size_t>(i) * lda + k];
            for (int j = 0; j < NR; ++j) acc[i][j] += av * brow[j];
        }
    }

    for (int i = 0; i < ROWS; ++i) {
        float* crow = c + static_cast<std::size_t>(i) * ldc;
        if (accumulate) {
            for (int j = 0; j < nvalid; ++j) crow[j] += acc[i][j];
        } else {
            for (int j = 0; j < nvalid; ++j) crow[j] = acc[i][j];
        }
    }
}

void run_panel(float* C, const float* A, const float* B, int M, int N, int K,
               bool accumulate, int j0, float* packed) {
    const int nvalid = std::min(NR, N - j0);
    // Pack B[:, j0:j0+NR] contiguously, zero-padding the ragged right edge.
    for (int k = 0; k < K; ++k) {
        const float* src = B + static_cast<std::size_t>(k) * N + j0;
        float* dst = packed + static_cast<std::size_t>(k) * NR;
        int j = 0;
        for (; j < nvalid; ++j) dst[j] = src[j];
        for (; j < NR; ++j) dst[j] = 0.0f;
    }

    int m = 0;
    for (; m + MR <= M; m += MR) {
        micro_kernel<MR>(C + static_cast<std::size_t>(m) * N + j0, N,
                         A + static_cast<std::size_t>(m) * K, K, packed, K, nvalid, accumulate);
    }
    switch (M - m) {
        case 3:
            micro_kernel<3>(C + static_cast<std::size_t>(m) * N + j0, N,
                            A + static_cast<std::size_t>(m) * K, K, packed, K, nvalid, accumulate);
            break;
        case 2:
            micro_kernel<2>(C + static_cast<std::size_t>(m) * N + j0, N,
                            A + static_cast<std::size_t>(m) * K, K, packed, K, nvalid, accumulate);
            break;
        case 1:
            micro_kernel<1>(C + static_cast<std::size_t>(m) * N + j0, N,
                            A + static_cast<std::size_t>(m) * K, K, packed, K, nvalid, accumulate);
            break;
        default:
            break;
    }
}

}  // namespace

void gemm(float* C, const float* A, const float* B, int M, int N, int K, bool accumulate) {
    if (M <= 0 || N <= 0) return;
    if (K <= 0) {
        if (!accumulate) std::fill(C, C + static_cast<std::size_t>(M) * N, 0.0f);
        return;
    }
    const std::size_t panels = (static_cast<std::size_t>(N) + NR - 1) / NR;
    parallel_for(panels, [&](std::size_t p) {
        thread_local std::vector<float> packed;
        packed.resize(static_cast<std::size_t>(K) * NR);
        run_panel(C, A, B, M, N, K, accumulate, static_cast<int>(p) * NR, packed.data());
    });
}

void transpose(float* dst, const float* src, int rows, int cols) {
    constexpr int TB = 32;
    for (int r0 = 0; r0 < rows; r0 += TB) {
        const int r1 = std::min(rows, r0 + TB);
        for (int c0 = 0; c0 < cols; c0 += TB) {
            const int c1 = std::min(cols, c0 + TB);
            for (int r = r0; r < r1; ++r)
                for (int c = c0; c < c1; ++c)
                    dst[static_cast<std::size_t>(c) * rows + r] =
                        src[static_cast<std::size_t>(r) * cols + c];
        }
    }
}

}  // namespace ctnet
