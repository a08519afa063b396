// Copyright 2026 The xlit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense kernels used by the transformer. Row-major storage throughout.
//
// Every output element is produced by exactly one thread with a fixed
// summation order, so results do not depend on the thread count. The
// serial:: versions are plain loops kept as the reference for tests and
// the benchmark.

#ifndef XLIT_KERNELS_H_
#define XLIT_KERNELS_H_

#include <cmath>
#include <cstddef>

namespace xlit::kernels {

// Below this many multiply-adds the parallel region costs more than it saves.
inline constexpr std::size_t kParallelWork = 1 << 15;

namespace serial {

// C[n,m] = A[n,k] B[k,m], or C += A B when accumulate.
template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m,
            bool accumulate = false) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      T s = accumulate ? c[i * m + j] : T(0);
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * m + j];
      c[i * m + j] = s;
    }
  }
}

// C[k,m] += A[n,k]^T B[n,m]
template <typename T>
void matmul_at_b(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < m; ++j) {
      T s = c[p * m + j];
      for (std::size_t i = 0; i < n; ++i) s += a[i * k + p] * b[i * m + j];
      c[p * m + j] = s;
    }
  }
}

// C[n,k] = A[n,m] B[k,m]^T, or C += when accumulate.
template <typename T>
void matmul_a_bt(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k,
                 bool accumulate = false) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      T s = 0;
      for (std::size_t j = 0; j < m; ++j) s += a[i * m + j] * b[p * m + j];
      c[i * k + p] = accumulate ? c[i * k + p] + s : s;
    }
  }
}

// In-place row softmax.
template <typename T>
void softmax_rows(T* x, std::size_t n, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    T* r = x + i * m;
    T mx = r[0];
    for (std::size_t j = 1; j < m; ++j) mx = r[j] > mx ? r[j] : mx;
    T s = 0;
    for (std::size_t j = 0; j < m; ++j) {
      r[j] = std::exp(r[j] - mx);
      s += r[j];
    }
    for (std::size_t j = 0; j < m; ++j) r[j] /= s;
  }
}

// y = (x - mean) * rstd * g + b per row; keeps xhat and rstd for backward.
template <typename T>
void layernorm(const T* x, const T* g, const T* b, T* y, T* xhat, T* rstd, std::size_t n,
               std::size_t d, T eps) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* r = x + i * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += r[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (r[j] - mean) * (r[j] - mean);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[i] = rs;
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (r[j] - mean) * rs;
      y[i * d + j] = xhat[i * d + j] * g[j] + b[j];
    }
  }
}

template <typename T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(0.70710678118654752440)));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440)));
  const T pdf = std::exp(T(-0.5) * x * x) * T(0.39894228040143267794);
  return cdf + x * pdf;
}

}  // namespace serial

template <typename T>
void matmul(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m,
            bool accumulate = false) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n * k * m > kParallelWork)
  for (long i = 0; i < rows; ++i) {
    T* cr = c + i * m;
    if (!accumulate) {
      for (std::size_t j = 0; j < m; ++j) cr[j] = 0;
    }
    const T* ar = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ar[p];
      const T* br = b + p * m;
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

template <typename T>
void matmul_at_b(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  const long rows = static_cast<long>(k);
#pragma omp parallel for schedule(static) if (n * k * m > kParallelWork)
  for (long p = 0; p < rows; ++p) {
    T* cr = c + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      const T* br = b + i * m;
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) cr[j] += av * br[j];
    }
  }
}

template <typename T>
void matmul_a_bt(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k,
                 bool accumulate = false) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n * k * m > kParallelWork)
  for (long i = 0; i < rows; ++i) {
    const T* ar = a + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T* br = b + p * m;
      T s = 0;
#pragma omp simd reduction(+ : s)
      for (std::size_t j = 0; j < m; ++j) s += ar[j] * br[j];
      c[i * k + p] = accumulate ? c[i * k + p] + s : s;
    }
  }
}

template <typename T>
void softmax_rows(T* x, std::size_t n, std::size_t m) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n * m > kParallelWork)
  for (long i = 0; i < rows; ++i) serial::softmax_rows(x + i * m, 1, m);
}

template <typename T>
void layernorm(const T* x, const T* g, const T* b, T* y, T* xhat, T* rstd, std::size_t n,
               std::size_t d, T eps) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n * d > kParallelWork)
  for (long i = 0; i < rows; ++i) {
    serial::layernorm(x + i * d, g, b, y + i * d, xhat + i * d, rstd + i, 1, d, eps);
  }
}

// dx = rstd * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat)), dxhat = dy*g.
// dx is accumulated; dg and db are accumulated with a fixed row order.
template <typename T>
void layernorm_backward(const T* dy, const T* xhat, const T* rstd, const T* g, T* dx, T* dg,
                        T* db, std::size_t n, std::size_t d) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n * d > kParallelWork)
  for (long i = 0; i < rows; ++i) {
    const T* dyr = dy + i * d;
    const T* xr = xhat + i * d;
    T m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T t = dyr[j] * g[j];
      m1 += t;
      m2 += t * xr[j];
    }
    m1 /= static_cast<T>(d);
    m2 /= static_cast<T>(d);
    for (std::size_t j = 0; j < d; ++j) {
      dx[i * d + j] += rstd[i] * (dyr[j] * g[j] - m1 - xr[j] * m2);
    }
  }
  const long cols = static_cast<long>(d);
#pragma omp parallel for schedule(static) if (n * d > kParallelWork)
  for (long j = 0; j < cols; ++j) {
    T sg = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sg += dy[i * d + j] * xhat[i * d + j];
      sb += dy[i * d + j];
    }
    dg[j] += sg;
    db[j] += sb;
  }
}

template <typename T>
void gelu(const T* x, T* y, std::size_t n) {
  const long len = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (long i = 0; i < len; ++i) y[i] = serial::gelu(x[i]);
}

// dx = dy * gelu'(x)
template <typename T>
void gelu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  const long len = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (long i = 0; i < len; ++i) dx[i] = dy[i] * serial::gelu_grad(x[i]);
}

// Column sums of A[n,m] added to out[m].
template <typename T>
void add_column_sums(const T* a, T* out, std::size_t n, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
#pragma omp simd
    for (std::size_t j = 0; j < m; ++j) out[j] += a[i * m + j];
  }
}

// Adds bias[m] to every row of A[n,m].
template <typename T>
void add_bias(T* a, const T* bias, std::size_t n, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
#pragma omp simd
    for (std::size_t j = 0; j < m; ++j) a[i * m + j] += bias[j];
  }
}

}  // namespace xlit::kernels

#endif  // XLIT_KERNELS_H_
