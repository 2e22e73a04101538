#pragma once

#include <stdexcept>
#include <string>

namespace forefront {

// Precondition violated by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Object used before it carries the data an operation needs.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class EmptySeriesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough post-onset samples for the requested prefix. Callers treat this
// as "stage not yet reached".
class PrefixUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditional accuracy is undefined when nothing was accepted.
class NoCoverage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoDecision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forefront
