#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsgd {

/// Precondition or shape violation in a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or config text.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite entry appeared in the network state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t agent, std::uint64_t iteration)
      : std::runtime_error("divergence: non-finite state at agent " + std::to_string(agent) +
                           ", iteration " + std::to_string(iteration)),
        agent_(agent),
        iteration_(iteration) {}

  std::size_t agent() const noexcept { return agent_; }
  std::uint64_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t agent_;
  std::uint64_t iteration_;
};

}  // namespace dsgd
