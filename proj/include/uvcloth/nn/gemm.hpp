#pragma once

// Small row-major GEMM tuned for the conv workloads here (im2col matrices,
// M up to ~512, K up to ~8k, N up to ~1k). Register-tiled 4x32 microkernel
// that GCC vectorizes well with -O3 -march=native. Single-threaded and
// bit-deterministic: every output element has a fixed reduction order.

#include <algorithm>
#include <cstddef>

namespace uvc::nn {

namespace detail {

template <typename T, int JT>
inline void gemm_tile(const T* __restrict a, const T* __restrict b, T* __restrict c, int rows,
                      int K, int lda, int ldb, int ldc) {
  // rows x JT tile of C accumulated over the full K range
  T acc[4][JT];
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < JT; ++j) acc[r][j] = T(0);
  for (int k = 0; k < K; ++k) {
    const T* __restrict brow = b + static_cast<size_t>(k) * ldb;
    for (int r = 0; r < rows; ++r) {
      T av = a[static_cast<size_t>(r) * lda + k];
      for (int j = 0; j < JT; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < JT; ++j) c[static_cast<size_t>(r) * ldc + j] += acc[r][j];
}

}  // namespace detail

// C[M x N] += A[M x K] * B[K x N], all row-major with the given leading dims.
template <typename T>
void gemm_accumulate(const T* a, const T* b, T* c, int M, int N, int K, int lda, int ldb,
                     int ldc) {
  constexpr int JT = 32;
  int j = 0;
  for (; j + JT <= N; j += JT)
    for (int i = 0; i < M; i += 4)
      detail::gemm_tile<T, JT>(a + static_cast<size_t>(i) * lda, b + j,
                               c + static_cast<size_t>(i) * ldc + j, std::min(4, M - i), K, lda,
                               ldb, ldc);
  if (j < N) {
    // ragged right edge, one column at a time
    for (int i = 0; i < M; ++i) {
      const T* arow = a + static_cast<size_t>(i) * lda;
      for (int jj = j; jj < N; ++jj) {
        T sum = T(0);
        for (int k = 0; k < K; ++k) sum += arow[k] * b[static_cast<size_t>(k) * ldb + jj];
        c[static_cast<size_t>(i) * ldc + jj] += sum;
      }
    }
  }
}

template <typename T>
void gemm(const T* a, const T* b, T* c, int M, int N, int K) {
  for (size_t i = 0; i < static_cast<size_t>(M) * N; ++i) c[i] = T(0);
  gemm_accumulate(a, b, c, M, N, K, K, N, N);
}

}  // namespace uvc::nn
