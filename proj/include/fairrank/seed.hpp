#pragma once

#include <cstdint>
#include <string_view>

namespace fairrank {

/// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a stage seed from a root seed and a stage label. Stable across
/// platforms (FNV-1a over the label, then splitmix).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix_seed(root ^ mix_seed(h));
}

}  // namespace fairrank
