#ifndef LMX_RNG_HPP
#define LMX_RNG_HPP

#include <cstdint>

// Counter-based generator "splitmix64-counter/v1": output k is the
// SplitMix64 finalizer applied to seed + (k+1) * golden gamma. Stateless
// apart from the counter, so every stream is reproducible across
// platforms from (seed, counter) alone. Normal deviates use the inverse
// CDF, not Box-Muller, to keep the draw count deterministic.

namespace lmx {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    // Derived stream for replicate i (seed xor index, the documented
    // convention for bootstrap/simulation substreams).
    Rng substream(std::uint64_t index) const { return Rng(seed_ ^ index); }

    std::uint64_t next_u64();
    // Uniform on (0, 1), never exactly 0 or 1.
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    double normal(double mean, double sd);
    double exponential();  // rate 1
    long uniform_int(long n);  // uniform on {0, ..., n-1}
    long poisson(double lambda);
    double gamma(double shape);  // scale 1
    // NB(mu, theta): gamma-Poisson mixture, var = mu + mu^2/theta.
    long negative_binomial(double mu, double theta);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace lmx

#endif
