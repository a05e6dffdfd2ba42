#pragma once

#include <stdexcept>
#include <string>

namespace coli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coli
