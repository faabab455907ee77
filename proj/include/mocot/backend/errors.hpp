#pragma once

#include <stdexcept>
#include <string>

namespace mocot::backend {

/// Bad arguments handed to a backend-facing call.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of every failure raised while talking to a model service.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  /// Transient errors are the only ones complete_with_retry retries.
  virtual bool transient() const { return false; }
};

/// Connection refused, DNS failure, read/connect timeout.
class NetworkError : public BackendError {
 public:
  using BackendError::BackendError;
  bool transient() const override { return true; }
};

class HttpStatusError : public BackendError {
 public:
  HttpStatusError(int status, const std::string& body);

  int status() const { return status_; }
  const std::string& body() const { return body_; }
  bool transient() const override { return status_ == 429 || (status_ >= 500 && status_ <= 599); }

 private:
  int status_;
  std::string body_;
};

/// 2xx reply that does not carry a usable first choice.
class MalformedResponseError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The scripted mock has no entry for the request key.
class MockMissError : public BackendError {
 public:
  explicit MockMissError(const std::string& key);

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Mock fixture file could not be loaded.
class MockScriptError : public std::runtime_error {
 public:
  MockScriptError(const std::string& message, int line);

  int line() const { return line_; }

 private:
  int line_;
};

class RetriesExhaustedError : public BackendError {
 public:
  RetriesExhaustedError(int attempts, const std::string& last_error);

  int attempts() const { return attempts_; }
  const std::string& last_error() const { return last_error_; }

 private:
  int attempts_;
  std::string last_error_;
};

}  // namespace mocot::backend
