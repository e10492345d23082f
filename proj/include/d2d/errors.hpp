#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace d2d {

// Requested operation exceeds what a backend supports (e.g. vertex enumeration too large).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad experiment/model configuration (widths, versions, config keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string path)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// A link's AoI hit the simulation cap; the policy starved it.
class EpisodeError : public std::runtime_error {
 public:
  EpisodeError(const std::string& what, std::size_t link, long long slot)
      : std::runtime_error(what + " (link " + std::to_string(link) + ", slot " +
                           std::to_string(slot) + ")"),
        link_(link),
        slot_(slot) {}
  // Same link and slot, message prefixed (e.g. with the layout index).
  EpisodeError(const std::string& prefix, const EpisodeError& inner)
      : std::runtime_error(prefix + inner.what()), link_(inner.link_), slot_(inner.slot_) {}
  std::size_t link() const noexcept { return link_; }
  long long slot() const noexcept { return slot_; }

 private:
  std::size_t link_;
  long long slot_;
};

}  // namespace d2d
