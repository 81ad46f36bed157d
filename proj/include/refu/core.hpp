// Shared aliases, error type, seeded RNG substreams and a deterministic
// chunked parallel-for. All randomness in the library flows from one root
// seed through named substreams; all parallel reductions happen over fixed
// chunk boundaries so results do not depend on the thread count.
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace refu {

using Vec3 = Eigen::Vector3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// splitmix64 finalizer; decorrelates nearby seeds
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
    return mix64(root ^ fnv1a64(name));
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view name) {
    return std::mt19937_64(substream_seed(root, name));
}

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

// Runs fn(chunk_index, begin, end) over [0,n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the thread
// count, so per-chunk results can be reduced in chunk order deterministically.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk_size, Fn&& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
    unsigned threads = std::min<std::size_t>(worker_count(), num_chunks);
    if (threads <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t c = next.fetch_add(1);
                if (c >= num_chunks) return;
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace refu
