// Copyright 2026 The atlasedit Authors
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


#pragma once

#include <stdexcept>
#include <string>

namespace atlasedit {

// Process exit codes shared by the CLI and the studio server.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDomain = 3,
  kProvider = 4,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual ExitCode exit_code() const noexcept { return ExitCode::kUsage; }
};

/// Bad arguments, violated preconditions, unreadable inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A well-formed request the domain cannot satisfy.
class DomainError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kDomain; }
};

/// No segment matched any of the requested tokens.
class NotFound : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Failure inside a model provider (remote transport, bad payload, ...).
class ProviderError : public Error {
 public:
  ProviderError(std::string provider, const std::string& detail)
      : Error(provider + ": " + detail), provider_(std::move(provider)) {}
  ExitCode exit_code() const noexcept override { return ExitCode::kProvider; }
  const std::string& provider() const noexcept { return provider_; }

 private:
  std::string provider_;
};

class Timeout : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

inline void require(bool cond, const std::string& message) {
  if (!cond) throw InvalidArgument(message);
}

}  // namespace atlasedit
