// Copyright 2026 The TLDR Authors.
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

namespace tldr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Lookup of an id that is not present.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Invalid argument or configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (open, write, rename).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tldr
