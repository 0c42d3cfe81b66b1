#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace onh {

/// Error type thrown by every module; the CLI maps it to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

/// Deterministic RNG with portable derived distributions.
///
/// std::mt19937_64 output is pinned by the standard; the std distributions
/// are not, so bounded integers, uniforms and normals are derived here with
/// fixed algorithms. Identical seeds give identical streams on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {
        // splitmix64 warm-up so nearby seeds decorrelate
        for (int i = 0; i < 4; ++i) next();
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, bound), rejection-sampled (no modulo bias).
    std::uint64_t below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53-bit resolution.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Marsaglia polar method; consumes a variable number of draws.
    double normal(double mean = 0.0, double stddev = 1.0);

    /// Child stream for parallel work item `index`; decoupled from the
    /// parent's position in its own stream.
    Rng fork(std::uint64_t index) const;

    /// Fisher-Yates permutation of {0, .., n-1}.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit, hex string. Used for config hashes in manifests.
std::string fnv1a_hex(const std::string& bytes);

// Little-endian scalar IO used by every binary file format.
void append_le_f64(std::string& out, double v);
void append_le_f32(std::string& out, float v);
double read_le_f64(const unsigned char* p);
float read_le_f32(const unsigned char* p);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Runs fn(0..n-1) on up to `jobs` threads. Work items must be independent
/// and write results only to their own index; under that contract the
/// outcome does not depend on scheduling. Exceptions are rethrown (first
/// by item index).
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace onh
