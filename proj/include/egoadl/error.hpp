#pragma once

#include <stdexcept>
#include <string>

namespace egoadl {

// Malformed input text (config documents, manifests, model files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model training / prediction contract violations (dimension, hash, class set).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace egoadl
