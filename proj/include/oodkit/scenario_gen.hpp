// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "oodkit/domain.hpp"

namespace oodkit {

/// Builds a named scenario. Known names:
///   coin            {K, m_frac, chip_mass, prior_in}
///   gaussian_grid_2d {grid, K, prior_in, in_radius, in_sigma, out_sigma,
///                     out_center_x, out_center_y, identical_out}
///   rings_2d        {grid, K, prior_in, in_radius, in_width, out_radius,
///                    out_width}
///   uniform_out     gaussian_grid_2d in-distribution with a uniform
///                   out-distribution
///   custom_file     {path}
/// Throws UnknownScenario / InvalidParams. The seed is reserved for
/// randomized variants; the built-in generators are deterministic.
OODScenario generate_scenario(const std::string& name,
                              const nlohmann::json& params, std::uint64_t seed);

/// An out-distribution on an existing domain, for test columns. Known kinds:
///   uniform   {}
///   gaussian  {center_x, center_y, sigma}      (needs 2D coordinates)
///   ring      {radius, width, center_x, center_y}
///   point     {id}
///   custom_file {path}  (out_mass array of matching length)
FiniteDistribution generate_out_distribution(const std::string& kind,
                                             const nlohmann::json& params,
                                             const DomainPtr& domain);

/// The M x M grid domain on [0,1]^2 shared by the 2D generators.
DomainPtr make_grid_domain(std::size_t grid);

}  // namespace oodkit
