#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stocksent {

// 64-bit FNV-1a. Used for the mock provider's body hash and for stage
// digests in the run manifest. Not cryptographic.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 12) + (a >> 4);
    return a;
}

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);

// Shortest round-trip decimal representation (std::to_chars). Deterministic
// across runs, so files built from doubles are byte-stable.
std::string format_double(double v);

// strtod over the whole string; throws ParseError on trailing junk.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

std::string getenv_or(const std::string& name, const std::string& fallback);

}  // namespace stocksent
