#pragma once

#include <cstdint>
#include <random>

namespace polcorr
{
//! Identifies an independent random sequence.
struct RandomStreamSpec
{
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

//! Purpose tags mixed into the stream id so that independent consumers never
//! share a sequence.
enum class StreamPurpose : std::uint64_t
{
    sampling = 1,
    digitization = 2,
    mixing = 3,
    test = 4,
};

// SplitMix64 finalizer
std::uint64_t mix64(std::uint64_t x);

//! Derive the stream id for (purpose, index).
RandomStreamSpec derive_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index);

//---------------------------------------------------------------------------//
/*!
 * Seeded random stream.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard. The standard distributions are implementation-defined, so the
 * uniform, normal and exponential transforms are written out here to keep
 * sequences bit-identical across standard libraries.
 */
class RandomStream
{
  public:
    explicit RandomStream(RandomStreamSpec spec);
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : RandomStream(RandomStreamSpec{master_seed, stream_id})
    {
    }

    // Uniform on [0, 1) with 53 random bits
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal (Box-Muller, no cached spare)
    double normal();

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    double exponential(double mean);

    // Uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n);

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace polcorr
