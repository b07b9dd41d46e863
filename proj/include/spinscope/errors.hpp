#pragma once

#include <stdexcept>
#include <string>

namespace spinscope {

// numeric-domain problems (non-Hermitian inputs, dimension guards, ill conditioning)
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// trace analysis could not complete (residual crossings, no dip, ...)
struct analysis_error : std::runtime_error {
  explicit analysis_error(const std::string& what) : std::runtime_error(what) {}
};

// geometric inversion failed (no root within tolerance, under-determined input)
struct inversion_error : std::runtime_error {
  explicit inversion_error(const std::string& what) : std::runtime_error(what) {}
};

// scenario file violates the schema
struct schema_error : std::runtime_error {
  explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinscope
