#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdual/grid.hpp"
#include "mdual/integrand.hpp"
#include "mdual/io.hpp"

namespace mdual {

/// Ids of the standard fixture suite, sorted.
std::vector<std::string> fixture_ids();

/// Problem JSON for one standard fixture. Throws DomainError for unknown ids.
Json make_fixture(const std::string& id);

/// Every standard fixture as (id, JSON), sorted by id.
std::vector<std::pair<std::string, Json>> standard_fixtures();

/// u_j = sign(sin(2 pi 2^k x)) for k = 0 .. steps-1 on a 1D grid (N = 1).
/// Converges weak* to 0 while the area stays sqrt(2) |Omega|.
std::vector<Vector> oscillation_sequence(const Grid& grid, int steps);

}  // namespace mdual
