#pragma once

namespace diachron {

// Gregorian year for a Hijri year, floor(0.970225 * h + 621.5716).
// Throws DomainError for year_h < 1.
int hijri_to_ce(int year_h);

}  // namespace diachron
