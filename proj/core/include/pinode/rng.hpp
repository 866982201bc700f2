#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pinode {

// Streams of the single run seed. Every module draws from its own stream so
// reordering work in one module never perturbs another.
enum class SeedStream : std::uint64_t {
  net_init = 1,
  excitation = 2,
  sensor = 3,
  train_shuffle = 4,
  eval_windows = 5,
  gradcheck = 6,
};

// splitmix64 mix of (seed, stream) into an independent child seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);
inline std::uint64_t split_seed(std::uint64_t seed, SeedStream s) {
  return split_seed(seed, static_cast<std::uint64_t>(s));
}

// mt19937_64 with hand-rolled value mappings. The standard distribution
// classes are implementation-defined, so seeded sequences would differ
// between standard libraries; these mappings keep them portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, pair-cached
  double normal();

  // unbiased integer in [0, bound), bound >= 1
  std::uint64_t below(std::uint64_t bound);

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pinode
