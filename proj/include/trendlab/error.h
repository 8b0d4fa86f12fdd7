#pragma once

#include <stdexcept>
#include <string>

namespace trendlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// market_data
class ParseError : public Error { using Error::Error; };
class InvariantError : public Error { using Error::Error; };
class DuplicateDateError : public Error { using Error::Error; };
class DefectFileError : public Error { using Error::Error; };

// labels
class EmptyInputError : public Error { using Error::Error; };
class DegenerateSplitError : public Error { using Error::Error; };

// features
class ZeroVolumeError : public Error { using Error::Error; };
class TooShortError : public Error { using Error::Error; };

// gbdt / evaluation
class ShapeError : public Error { using Error::Error; };
class SingleClassError : public Error { using Error::Error; };
class FoldDegenerateError : public Error { using Error::Error; };

// pipeline / synth / cli
class SeriesTooShortError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class UsageError : public Error { using Error::Error; };

}  // namespace trendlab
