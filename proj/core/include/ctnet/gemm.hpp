#pragma once

#include <cstddef>

namespace ctnet {

// C[M x N] = A[M x K] * B[K x N], all row-major float32. When accumulate is
// true the product is added onto the existing contents of C.
//
// The kernel packs B into K x 16 panels and accumulates each output element
// along k in plain ascending order, so the result is independent of blocking
// and thread count (one owner per output column panel).
void gemm(float* C, const float* A, const float* B, int M, int N, int K,
          bool accumulate = false);

// dst[cols x rows] = src[rows x cols] transposed, row-major.
void transpose(float* dst, const float* src, int rows, int cols);

}  // namespace ctnet
