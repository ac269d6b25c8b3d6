#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace racegp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// dynamics
class SpeedBelowDynamicFloor : public Error {
 public:
  using Error::Error;
};
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

// track
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
class DegenerateTrack : public Error {
 public:
  using Error::Error;
};
class RacelineTrackMismatch : public Error {
 public:
  using Error::Error;
};

// datagen
class EpisodeDiverged : public Error {
 public:
  using Error::Error;
};
class EmptySector : public Error {
 public:
  using Error::Error;
};

// gp
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};
class UnknownCombo : public Error {
 public:
  using Error::Error;
};

// eval
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class ConstantTarget : public Error {
 public:
  using Error::Error;
};
class IncompleteMatrix : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace racegp
