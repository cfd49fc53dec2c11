/* Copyright 2026 The gqa Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef GQA_ERROR_HPP_
#define GQA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gqa {

// Base for every error the library raises. Subclasses map onto CLI exit
// codes: InputError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidSegment : public InputError {
 public:
  using InputError::InputError;
};

class EmptyAfterClamp : public InputError {
 public:
  using InputError::InputError;
};

class ShapeMismatch : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  ValidationError(const std::string& what, long line = -1)
      : InputError(line >= 0 ? "line " + std::to_string(line) + ": " + what
                             : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class UnknownQuestionId : public InputError {
 public:
  using InputError::InputError;
};

class DuplicatePrediction : public InputError {
 public:
  using InputError::InputError;
};

class EmptyDataset : public InputError {
 public:
  using InputError::InputError;
};

class EmptyMaskList : public InputError {
 public:
  using InputError::InputError;
};

class NegativeCountMismatch : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class NotSynthetic : public InputError {
 public:
  using InputError::InputError;
};

class NonFiniteLoss : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gqa

#endif  // GQA_ERROR_HPP_
