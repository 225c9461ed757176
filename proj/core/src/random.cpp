#include "polcorr/random.hpp"

#include <cmath>
#include <numbers>

namespace polcorr
{
std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStreamSpec
derive_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index)
{
    return {master_seed, mix64(static_cast<std::uint64_t>(purpose) << 56 ^ index)};
}

RandomStream::RandomStream(RandomStreamSpec spec)
    : engine_(mix64(spec.master_seed ^ mix64(spec.stream_id)))
{
}

double RandomStream::normal()
{
    double const u1 = 1.0 - uniform();  // (0, 1]
    double const u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::exponential(double mean)
{
    return -mean * std::log(1.0 - uniform());
}

std::uint64_t RandomStream::below(std::uint64_t n)
{
    // Rejection keeps the draw exactly uniform
    std::uint64_t const limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do
    {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

} // namespace polcorr
