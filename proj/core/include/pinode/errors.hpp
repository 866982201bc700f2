#pragma once

#include <stdexcept>
#include <string>

namespace pinode {

// A computation produced a non-finite value. The message names the
// operation (or training step / integration stage) that failed.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (CSV row, JSON document, config file).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what, long line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what
                                     : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pinode
