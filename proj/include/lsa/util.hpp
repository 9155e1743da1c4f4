#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lsa {

// Hex-encoded SHA-256 digest (OpenSSL EVP).
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's contents; throws std::runtime_error if unreadable.
std::string sha256_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Bounded uniform draw in [0, n) via rejection sampling on mt19937_64.
// std::uniform_int_distribution is implementation-defined, which would break
// the seed-reproducibility guarantees, so the draw is spelled out here.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

// Seeded partial Fisher-Yates: k distinct values sampled from `pool`,
// in selection order.
std::vector<int> sample_without_replacement(std::mt19937_64& rng,
                                            std::vector<int> pool,
                                            std::size_t k);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace lsa
