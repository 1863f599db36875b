#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace segtopic {

// Fixed 12-way label set: 11 in-domain situation types plus out-of-domain,
// which always takes the highest id. Ids index posterior vectors everywhere.
inline constexpr std::size_t kNumTopics = 12;
inline constexpr std::size_t kNumInDomain = 11;
inline constexpr std::size_t kOutOfDomainId = 11;

inline constexpr std::array<std::string_view, kNumTopics> kTopicNames = {
    "Evacuation",
    "Food Supply",
    "Urgent Rescue",
    "Utilities, Energy, or Sanitation",
    "Infrastructure",
    "Medical Assistance",
    "Shelter",
    "Water Supply",
    "Civil Unrest or Wide-spread Crime",
    "Elections and Politics",
    "Terrorism or other Extreme Violence",
    "Out-of-domain",
};

inline std::string_view topic_name(std::size_t id) { return kTopicNames.at(id); }

inline std::optional<std::size_t> topic_id(std::string_view name) {
  for (std::size_t i = 0; i < kNumTopics; ++i) {
    if (kTopicNames[i] == name) return i;
  }
  return std::nullopt;
}

inline bool is_in_domain(std::size_t id) { return id < kNumInDomain; }

}  // namespace segtopic
