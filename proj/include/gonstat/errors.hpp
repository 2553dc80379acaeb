// Copyright 2026 The GonStat Authors
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

#ifndef GONSTAT_ERRORS_HPP
#define GONSTAT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace gonstat {

// Every toolkit failure derives from one of two bases.  The CLI maps
// DataError to exit code 2 (malformed or inconsistent input) and
// NumericError to exit code 3 (computation impossible on valid input).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, or written.
class IoError : public DataError {
 public:
  using DataError::DataError;
};

// A file violated a declared column layout or value vocabulary.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string& what, long line = 0)
      : DataError(line > 0 ? what + " (line " + std::to_string(line) + ")"
                           : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

// Structurally valid input broke a semantic rule (e.g. a grade value
// present on an item marked ungradable).
class InvariantViolation : public DataError {
 public:
  InvariantViolation(const std::string& what, long line = 0)
      : DataError(line > 0 ? what + " (line " + std::to_string(line) + ")"
                           : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

class MalformedLog : public DataError {
 public:
  using DataError::DataError;
};

class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidCount : public DataError {
 public:
  using DataError::DataError;
};

class EmptySample : public DataError {
 public:
  using DataError::DataError;
};

class ShapeMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NoVisits : public DataError {
 public:
  using DataError::DataError;
};

class NoImages : public DataError {
 public:
  using DataError::DataError;
};

class ParamOutOfRange : public DataError {
 public:
  using DataError::DataError;
};

class InvalidSpec : public DataError {
 public:
  using DataError::DataError;
};

// Ordinal resolution is impossible: a categorical scale with its rank
// order disabled saw three distinct values.
class NonOrdinalTie : public NumericError {
 public:
  using NumericError::NumericError;
};

// Agreement is undefined because expected disagreement is zero.
class DegenerateData : public NumericError {
 public:
  using NumericError::NumericError;
};

class OneClassOnly : public NumericError {
 public:
  using NumericError::NumericError;
};

// A bootstrap statistic stayed undefined after the redraw budget.
class StatisticUndefined : public NumericError {
 public:
  StatisticUndefined(const std::string& what, long resample)
      : NumericError(what + " (resample " + std::to_string(resample) + ")"),
        resample_(resample) {}
  long resample() const { return resample_; }

 private:
  long resample_ = 0;
};

// The Fisher information matrix is singular; carries offending columns.
class SingularInformation : public NumericError {
 public:
  SingularInformation(const std::string& what, std::vector<int> columns)
      : NumericError(what), columns_(std::move(columns)) {}
  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

class MaskNotFound : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace gonstat

#endif  // GONSTAT_ERRORS_HPP
