#include "f2b/errors.hpp"

#include <utility>

namespace f2b {

namespace {

std::string located(const std::string& source, std::size_t line, const std::string& message) {
  std::string out = source;
  if (line > 0) out += ":" + std::to_string(line);
  out += ": " + message;
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : Error(located(source, line, message)), line_(line) {}

SolverError::SolverError(const std::string& message, int iterations, double residual)
    : Error(message + " (iterations=" + std::to_string(iterations) +
            ", relative residual=" + std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

PredictorError::PredictorError(const std::string& message, std::string diagnostics)
    : Error(diagnostics.empty() ? message : message + "\n" + diagnostics),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace f2b
