// Copyright 2026 The qwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qwalk {

inline constexpr const char* kVersion = "0.1.0";

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// 2x2 complex matrix; the workhorse of the coin-space algebra.
template <typename Scalar>
using Mat2 = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
using Mat2Real = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
using CMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using Mat2cd = Mat2<double>;
using Mat2rd = Mat2Real<double>;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The coset decomposition has no finite coordinate (the matrix is purely
/// off-diagonal in its first row).
class DegenerateCosetError : public Error {
 public:
  using Error::Error;
};

/// A step would move probability mass outside the lattice window.
class SupportOverflowError : public Error {
 public:
  using Error::Error;
};

/// A requested window exceeds the configured memory cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A closed-form evaluator was called outside its domain of validity.
class ClosedFormError : public Error {
 public:
  using Error::Error;
};

namespace detail {

/// Compensated (Kahan) sum over an Eigen array/vector expression.
template <typename Derived>
typename Derived::Scalar kahan_sum(const Eigen::DenseBase<Derived>& xs) {
  using S = typename Derived::Scalar;
  S sum{};
  S carry{};
  const Eigen::Index n = xs.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const S y = xs(i) - carry;
    const S t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace detail

}  // namespace qwalk
