#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hawkesmm {

/// Market order side. An ask event is a buy market order hitting the maker's
/// ask quote (maker sells); a bid event is a sell market order hitting the bid.
enum class Side : std::uint8_t { Ask = 0, Bid = 1 };

inline constexpr std::size_t side_index(Side s) { return static_cast<std::size_t>(s); }
std::string_view to_string(Side s);
Side side_from_string(std::string_view s);

/// Raised when a computation produces non-finite values or blows up
/// (unstable grid, supercritical branching tree, exploding Hawkes path).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an input/output file cannot be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of stream `stream` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Random source with portable variates: every draw is a deterministic
/// function of the 64-bit engine output, so results do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    /// Exp(rate) variate.
    double exponential(double rate);
    /// Uniform index in [0, n).
    std::size_t index(std::size_t n);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Shortest decimal text that round-trips is not required here; outputs use
/// 17 significant digits so files are bit-stable for identical doubles.
std::string format_double(double x);

/// Runs body(k) for k in [0, n) on `threads` workers (0 = hardware
/// concurrency). Work is split into contiguous blocks; body must only write
/// to slots owned by its index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Worker count used when a caller passes 0.
unsigned default_threads();

}  // namespace hawkesmm
