#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eegfs {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A tone at or above the Nyquist frequency.
class NyquistError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Bad or unusable input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. `offset()` is a byte offset for binary formats;
/// `row()`/`column()` are 1-based positions for text formats (0 = unknown).
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DataError(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}
  explicit ParseError(const std::string& what) : DataError(what) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t offset_ = 0;
  std::size_t row_ = 0;
  std::size_t column_ = 0;
};

/// Structurally inconsistent data (sizes that do not add up, no signals, ...).
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

/// Input too short or otherwise outside an operation's domain.
class InputError : public DataError {
 public:
  using DataError::DataError;
};

/// Zero-variance channel, zero activity, zero-variance matrix.
class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

/// A required artifact is absent.
class MissingInputError : public DataError {
 public:
  using DataError::DataError;
};

/// Runtime abort (CLI exit code 4).
class RuntimeAbort : public Error {
 public:
  using Error::Error;
};

/// Runs `f`, re-raising any library error as the same category with `context`
/// prepended to its message.
template <typename F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  const auto msg = [&](const std::exception& e) {
    const std::string what = e.what();
    return what.rfind(context + ": ", 0) == 0 ? what : context + ": " + what;
  };
  try {
    return f();
  } catch (const DegenerateError& e) {
    throw DegenerateError(msg(e));
  } catch (const InputError& e) {
    throw InputError(msg(e));
  } catch (const IntegrityError& e) {
    throw IntegrityError(msg(e));
  } catch (const MissingInputError& e) {
    throw MissingInputError(msg(e));
  } catch (const ParseError& e) {
    throw ParseError(msg(e));
  } catch (const DataError& e) {
    throw DataError(msg(e));
  } catch (const NyquistError& e) {
    throw NyquistError(msg(e));
  } catch (const ConfigError& e) {
    throw ConfigError(msg(e));
  } catch (const RuntimeAbort& e) {
    throw RuntimeAbort(msg(e));
  } catch (const Error& e) {
    throw Error(msg(e));
  }
}

}  // namespace eegfs
