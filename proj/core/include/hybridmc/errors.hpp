// Copyright 2026 The hybridmc Authors
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

#ifndef HYBRIDMC_ERRORS_HPP
#define HYBRIDMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hybridmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid problem, mesh or run configuration (bad file, bad key, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function (position outside the slab,
/// zero-norm reference in an error norm, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double spectral_radius)
      : Error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// Reference ladder failed to certify the requested number of digits.
class CertificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hybridmc

#endif  // HYBRIDMC_ERRORS_HPP
