#include "diachron/calendar.hpp"

#include <cstdint>
#include <string>

#include "diachron/error.hpp"

namespace diachron {

int hijri_to_ce(int year_h) {
    if (year_h < 1) throw DomainError("Hijri year must be >= 1, got " + std::to_string(year_h));
    // Fixed-point in millionths; both terms are positive so integer division floors.
    const std::int64_t scaled = std::int64_t{970225} * year_h + std::int64_t{621571600};
    return static_cast<int>(scaled / 1000000);
}

}  // namespace diachron
