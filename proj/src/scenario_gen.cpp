// SPDX-License-Identifier: Apache-2.0
#include "oodkit/scenario_gen.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "oodkit/oracle.hpp"
#include "oodkit/serialize.hpp"

namespace oodkit {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

double param(const json& params, const std::string& key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number()) {
    throw InvalidParams("scenario parameter '" + key + "' must be a number");
  }
  return params[key].get<double>();
}

std::size_t uparam(const json& params, const std::string& key,
                   std::size_t fallback) {
  const double v = param(params, key, static_cast<double>(fallback));
  if (v < 0 || v != std::floor(v)) {
    throw InvalidParams("scenario parameter '" + key +
                        "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> normalized(std::vector<double> mass) {
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw InvalidParams("distribution has zero total mass");
  for (double& m : mass) m /= total;
  return mass;
}

double gaussian_density(double dx, double dy, double sigma) {
  return std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
}

// Class means on a circle around the grid center.
std::vector<std::pair<double, double>> class_centers(std::size_t k,
                                                     double radius) {
  std::vector<std::pair<double, double>> centers(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double angle = 2.0 * kPi * static_cast<double>(c) /
                         static_cast<double>(k);
    centers[c] = {0.5 + radius * std::cos(angle),
                  0.5 + radius * std::sin(angle)};
  }
  return centers;
}

// K Gaussian blobs as the labeled in-distribution on a grid domain.
LabeledInDistribution gaussian_in_distribution(const DomainPtr& domain,
                                               std::size_t k, double in_radius,
                                               double in_sigma) {
  const std::size_t n = domain->size();
  const auto centers = class_centers(k, in_radius);
  std::vector<double> joint(k * n, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t x = 0; x < n; ++x) {
      const auto p = domain->coords(x);
      joint[c * n + x] =
          gaussian_density(p[0] - centers[c].first, p[1] - centers[c].second,
                           in_sigma);
    }
  }
  joint = normalized(std::move(joint));
  return LabeledInDistribution(domain, k, std::move(joint));
}

OODScenario gaussian_grid_2d(const json& params) {
  const std::size_t grid = uparam(params, "grid", 64);
  const std::size_t k = uparam(params, "K", 3);
  const double prior_in = param(params, "prior_in", 0.5);
  const double in_radius = param(params, "in_radius", 0.25);
  const double in_sigma = param(params, "in_sigma", 0.08);
  const double out_sigma = param(params, "out_sigma", 0.35);
  const double cx = param(params, "out_center_x", 0.5);
  const double cy = param(params, "out_center_y", 0.5);
  const bool identical_out =
      params.contains("identical_out") && params["identical_out"].get<bool>();

  auto domain = make_grid_domain(grid);
  auto in_dist = gaussian_in_distribution(domain, k, in_radius, in_sigma);
  std::vector<double> out_mass(domain->size());
  if (identical_out) {
    for (std::size_t x = 0; x < domain->size(); ++x) {
      out_mass[x] = in_dist.marginal(x);
    }
  } else {
    for (std::size_t x = 0; x < domain->size(); ++x) {
      const auto p = domain->coords(x);
      out_mass[x] = gaussian_density(p[0] - cx, p[1] - cy, out_sigma);
    }
  }
  return OODScenario(std::move(in_dist),
                     FiniteDistribution(domain, normalized(std::move(out_mass))),
                     prior_in);
}

std::vector<double> ring_mass(const DomainPtr& domain, double radius,
                              double width, double cx, double cy) {
  std::vector<double> mass(domain->size());
  for (std::size_t x = 0; x < domain->size(); ++x) {
    const auto p = domain->coords(x);
    const double r = std::hypot(p[0] - cx, p[1] - cy);
    const double d = (r - radius) / width;
    mass[x] = std::exp(-0.5 * d * d);
  }
  return mass;
}

OODScenario rings_2d(const json& params) {
  const std::size_t grid = uparam(params, "grid", 64);
  const std::size_t k = uparam(params, "K", 4);
  const double prior_in = param(params, "prior_in", 0.5);
  const double in_radius = param(params, "in_radius", 0.2);
  const double in_width = param(params, "in_width", 0.04);
  const double out_radius = param(params, "out_radius", 0.38);
  const double out_width = param(params, "out_width", 0.04);

  auto domain = make_grid_domain(grid);
  const std::size_t n = domain->size();

  // In-ring split into K angular sectors, one class per sector.
  auto base = ring_mass(domain, in_radius, in_width, 0.5, 0.5);
  std::vector<double> joint(k * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto p = domain->coords(x);
    double angle = std::atan2(p[1] - 0.5, p[0] - 0.5);
    if (angle < 0) angle += 2.0 * kPi;
    auto sector = static_cast<std::size_t>(angle / (2.0 * kPi) *
                                           static_cast<double>(k));
    if (sector >= k) sector = k - 1;
    joint[sector * n + x] = base[x];
  }
  joint = normalized(std::move(joint));

  auto out_mass = normalized(ring_mass(domain, out_radius, out_width, 0.5, 0.5));
  return OODScenario(LabeledInDistribution(domain, k, std::move(joint)),
                     FiniteDistribution(domain, std::move(out_mass)), prior_in);
}

OODScenario uniform_out(const json& params) {
  const std::size_t grid = uparam(params, "grid", 64);
  const std::size_t k = uparam(params, "K", 3);
  const double prior_in = param(params, "prior_in", 0.5);
  const double in_radius = param(params, "in_radius", 0.25);
  const double in_sigma = param(params, "in_sigma", 0.08);

  auto domain = make_grid_domain(grid);
  auto in_dist = gaussian_in_distribution(domain, k, in_radius, in_sigma);
  return OODScenario(std::move(in_dist), FiniteDistribution::uniform(domain),
                     prior_in);
}

}  // namespace

DomainPtr make_grid_domain(std::size_t grid) {
  if (grid < 2) throw InvalidParams("grid size must be >= 2");
  std::vector<std::string> ids;
  std::vector<double> coords;
  ids.reserve(grid * grid);
  coords.reserve(grid * grid * 2);
  for (std::size_t iy = 0; iy < grid; ++iy) {
    for (std::size_t ix = 0; ix < grid; ++ix) {
      ids.push_back("g" + std::to_string(ix) + "_" + std::to_string(iy));
      // Cell centers of an M x M partition of [0,1]^2.
      coords.push_back((static_cast<double>(ix) + 0.5) /
                       static_cast<double>(grid));
      coords.push_back((static_cast<double>(iy) + 0.5) /
                       static_cast<double>(grid));
    }
  }
  return std::make_shared<DiscreteDomain>(std::move(ids), std::move(coords), 2);
}

OODScenario generate_scenario(const std::string& name, const json& params,
                              std::uint64_t seed) {
  (void)seed;  // the built-in generators are parameter-deterministic
  if (name == "coin") {
    return build_coin_scenario(uparam(params, "K", 2),
                               param(params, "m_frac", 0.5),
                               param(params, "chip_mass", 1.0),
                               param(params, "prior_in", 0.5))
        .scenario;
  }
  if (name == "gaussian_grid_2d") return gaussian_grid_2d(params);
  if (name == "rings_2d") return rings_2d(params);
  if (name == "uniform_out") return uniform_out(params);
  if (name == "custom_file") {
    if (!params.contains("path")) {
      throw InvalidParams("custom_file scenario needs a 'path' parameter");
    }
    return load_scenario(params["path"].get<std::string>());
  }
  throw UnknownScenario("unknown scenario '" + name + "'");
}

FiniteDistribution generate_out_distribution(const std::string& kind,
                                             const json& params,
                                             const DomainPtr& domain) {
  if (kind == "uniform") {
    return FiniteDistribution::uniform(domain);
  }
  if (kind == "gaussian") {
    if (!domain->has_coordinates() || domain->coord_dim() != 2) {
      throw InvalidParams("gaussian out-distribution needs a 2D domain");
    }
    const double cx = param(params, "center_x", 0.5);
    const double cy = param(params, "center_y", 0.5);
    const double sigma = param(params, "sigma", 0.2);
    std::vector<double> mass(domain->size());
    for (std::size_t x = 0; x < domain->size(); ++x) {
      const auto p = domain->coords(x);
      mass[x] = gaussian_density(p[0] - cx, p[1] - cy, sigma);
    }
    return FiniteDistribution(domain, normalized(std::move(mass)));
  }
  if (kind == "ring") {
    if (!domain->has_coordinates() || domain->coord_dim() != 2) {
      throw InvalidParams("ring out-distribution needs a 2D domain");
    }
    auto mass = ring_mass(domain, param(params, "radius", 0.4),
                          param(params, "width", 0.04),
                          param(params, "center_x", 0.5),
                          param(params, "center_y", 0.5));
    return FiniteDistribution(domain, normalized(std::move(mass)));
  }
  if (kind == "point") {
    if (!params.contains("id")) {
      throw InvalidParams("point out-distribution needs an 'id' parameter");
    }
    return FiniteDistribution::point_mass(
        domain, domain->index_of(params["id"].get<std::string>()));
  }
  if (kind == "custom_file") {
    if (!params.contains("path")) {
      throw InvalidParams("custom_file out-distribution needs a 'path'");
    }
    return load_out_distribution(params["path"].get<std::string>(), domain);
  }
  throw UnknownScenario("unknown out-distribution kind '" + kind + "'");
}

}  // namespace oodkit
