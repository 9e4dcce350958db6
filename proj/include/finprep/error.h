// Copyright 2026 The finprep Authors.
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

#ifndef FINPREP_ERROR_H_
#define FINPREP_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace finprep {

// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the caller: configuration, arguments, or a
// precondition on data. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::uint64_t records_written = 0)
      : Error(what), records_written_(records_written) {}

  // Records successfully written before the failure, when writing.
  std::uint64_t records_written() const { return records_written_; }

 private:
  std::uint64_t records_written_;
};

// A file was readable but its content is structurally wrong.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace finprep

#endif  // FINPREP_ERROR_H_
