#pragma once

#include <cstdint>

namespace jh {

// sample_index layout: repetition in the high 32 bits, then a per-method slot,
// then up to four re-asks of the same slot.
inline constexpr std::uint64_t kMaxReasks = 4;

constexpr std::uint64_t sample_slot(std::uint64_t repetition, std::uint64_t slot) {
    return (repetition << 32) | (slot & 0xffffffffULL);
}

constexpr std::uint64_t with_reask(std::uint64_t slot_index, int reask) {
    return slot_index * kMaxReasks + static_cast<std::uint64_t>(reask);
}

}  // namespace jh
