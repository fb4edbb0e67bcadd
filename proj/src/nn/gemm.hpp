// Copyright 2026 The ECAT Authors.
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

#ifndef ECAT_SRC_NN_GEMM_HPP_
#define ECAT_SRC_NN_GEMM_HPP_

#include <cstdint>

#include <Eigen/Core>

namespace ecat::nn::internal {

template <typename T>
using RowMajor =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMajor<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMajor<T>>;

// C[m,n] = A'[m,k] * B'[k,n] + (accumulate ? C : 0), where A' is A or A^T
// depending on `trans_a` (A stored row-major as [m,k] or [k,m]).
template <typename T>
void Gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
          std::int64_t k, const T* a, const T* b, T* c, bool accumulate) {
  MutMap<T> cm(c, m, n);
  if (!trans_a && !trans_b) {
    ConstMap<T> am(a, m, k), bm(b, k, n);
    if (accumulate) cm.noalias() += am * bm; else cm.noalias() = am * bm;
  } else if (!trans_a && trans_b) {
    ConstMap<T> am(a, m, k), bm(b, n, k);
    if (accumulate) cm.noalias() += am * bm.transpose();
    else cm.noalias() = am * bm.transpose();
  } else if (trans_a && !trans_b) {
    ConstMap<T> am(a, k, m), bm(b, k, n);
    if (accumulate) cm.noalias() += am.transpose() * bm;
    else cm.noalias() = am.transpose() * bm;
  } else {
    ConstMap<T> am(a, k, m), bm(b, n, k);
    if (accumulate) cm.noalias() += am.transpose() * bm.transpose();
    else cm.noalias() = am.transpose() * bm.transpose();
  }
}

}  // namespace ecat::nn::internal

#endif  // ECAT_SRC_NN_GEMM_HPP_
