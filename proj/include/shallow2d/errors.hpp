// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The shallow2d authors
#pragma once

#include <stdexcept>
#include <string>

namespace shallow2d {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A configured size or memory cap would be exceeded.
class ResourceCapExceeded : public Error {
 public:
  using Error::Error;
};

// Linear-algebra backend failure or a state that lost all weight.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace shallow2d
