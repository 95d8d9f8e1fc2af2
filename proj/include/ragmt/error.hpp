#pragma once

#include <stdexcept>
#include <string>

namespace ragmt {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Corpus or test-set ingestion failed (unreadable file, strict-mode violation, bad domain tag).
class IngestError : public Error {
  public:
    using Error::Error;
};

/// On-disk index is unreadable, corrupt or of an unsupported version.
class IndexFormatError : public Error {
  public:
    using Error::Error;
};

/// Raw model output does not satisfy the {"translation": ...} contract.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// A backend request failed before yielding a response body.
class TransportError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration or precondition violation at an API boundary.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace ragmt
