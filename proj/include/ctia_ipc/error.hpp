#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ctia_ipc {

// Every error carries the module that raised it so CLI messages are qualified.
class Error : public std::runtime_error {
  public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    [[nodiscard]] const std::string& module() const noexcept { return module_; }

  private:
    std::string module_;
};

class InvalidParameter : public Error {
    using Error::Error;
};

class InvalidState : public Error {
    using Error::Error;
};

class InvalidConfiguration : public Error {
    using Error::Error;
};

class InvalidInput : public Error {
    using Error::Error;
};

class DegenerateFit : public Error {
    using Error::Error;
};

class ScheduleError : public Error {
    using Error::Error;
};

class IndexError : public Error {
    using Error::Error;
};

class DimensionError : public Error {
    using Error::Error;
};

class IoError : public Error {
    using Error::Error;
};

class FormatError : public Error {
  public:
    FormatError(std::string module, const std::string& what, std::size_t byte_offset)
        : Error(std::move(module), what + " (at byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    [[nodiscard]] std::size_t byte_offset() const noexcept { return byte_offset_; }

  private:
    std::size_t byte_offset_;
};

// Collects every violation found in a document instead of stopping at the first.
class ValidationError : public Error {
  public:
    ValidationError(std::string module, std::vector<std::string> issues)
        : Error(std::move(module), join(issues)), issues_(std::move(issues)) {}

    [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

  private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = std::to_string(issues.size()) + " validation issue(s)";
        for (const auto& issue : issues) {
            out += "; ";
            out += issue;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

} // namespace ctia_ipc
