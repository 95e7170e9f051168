#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace otfpf {

// Every random stream is keyed by (root seed, label[, index]):
//   stream = splitmix64(splitmix64(root) ^ fnv1a64(label) [^ splitmix64(index)])
// and feeds a std::mt19937_64. Labels keep truth noise, observation noise,
// particle noise and per-replication streams independent of each other.
namespace seeds {

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream(std::uint64_t root, std::string_view label) noexcept {
  return splitmix64(splitmix64(root) ^ fnv1a64(label));
}

constexpr std::uint64_t stream(std::uint64_t root, std::string_view label,
                               std::uint64_t index) noexcept {
  return splitmix64(stream(root, label) ^ splitmix64(index));
}

}  // namespace seeds

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view label) {
  return std::mt19937_64{seeds::stream(root, label)};
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view label,
                                std::uint64_t index) {
  return std::mt19937_64{seeds::stream(root, label, index)};
}

/// Matrix of i.i.d. standard normal draws, filled row by row.
inline Eigen::MatrixXd standard_normal(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

inline Eigen::VectorXd standard_normal_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(rng);
  return out;
}

}  // namespace otfpf
