#ifndef PEDSPAWN_GROUND_GRID_HPP
#define PEDSPAWN_GROUND_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pedspawn/raster.hpp"

namespace pedspawn {

enum class CellState : std::uint8_t { Unknown = 0, Spawnable = 1, Blocked = 2 };

/// Axis-aligned grid on the ground plane. Cell (ix, iz) covers
/// [x_min + ix*cell, x_min + (ix+1)*cell) x [z_min + iz*cell, ...).
struct GridSpec {
  double x_min = -20.0;
  double z_min = 0.0;
  double cell_size = 0.25;
  int nx = 160;
  int nz = 240;

  static GridSpec covering(double x_min, double x_max, double z_min, double z_max, double cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("GridSpec: cell_size must be positive");
    if (!(x_max > x_min) || !(z_max > z_min)) throw std::invalid_argument("GridSpec: empty placement range");
    return {x_min, z_min, cell_size, static_cast<int>(std::ceil((x_max - x_min) / cell_size)),
            static_cast<int>(std::ceil((z_max - z_min) / cell_size))};
  }

  double x_max() const { return x_min + nx * cell_size; }
  double z_max() const { return z_min + nz * cell_size; }

  std::optional<std::pair<int, int>> cell_of(double x, double z) const {
    const double fx = std::floor((x - x_min) / cell_size);
    const double fz = std::floor((z - z_min) / cell_size);
    if (!(fx >= 0.0 && fx < nx && fz >= 0.0 && fz < nz)) return std::nullopt;
    return std::pair{static_cast<int>(fx), static_cast<int>(fz)};
  }

  double center_x(int ix) const { return x_min + (ix + 0.5) * cell_size; }
  double center_z(int iz) const { return z_min + (iz + 0.5) * cell_size; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Footprint {
  double x = 0.0;
  double z = 0.0;
  double radius = 0.35;
};

class GroundGrid {
 public:
  GroundGrid() = default;
  explicit GroundGrid(const GridSpec& spec) : spec_(spec) {
    if (!(spec.cell_size > 0.0) || spec.nx <= 0 || spec.nz <= 0) {
      throw std::invalid_argument("GroundGrid: invalid grid geometry");
    }
    cells_.assign(static_cast<std::size_t>(spec.nx) * spec.nz, CellState::Unknown);
  }

  const GridSpec& spec() const { return spec_; }
  int nx() const { return spec_.nx; }
  int nz() const { return spec_.nz; }

  CellState at(int ix, int iz) const { return cells_[index(ix, iz)]; }
  void set(int ix, int iz, CellState s) { cells_[index(ix, iz)] = s; }
  bool in_range(int ix, int iz) const { return ix >= 0 && iz >= 0 && ix < spec_.nx && iz < spec_.nz; }

  std::size_t count(CellState s) const { return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s)); }

  friend bool operator==(const GroundGrid&, const GroundGrid&) = default;

 private:
  std::size_t index(int ix, int iz) const {
    if (!in_range(ix, iz)) throw std::out_of_range("GroundGrid: cell index out of range");
    return static_cast<std::size_t>(iz) * spec_.nx + ix;
  }

  GridSpec spec_;
  std::vector<CellState> cells_;
};

/// Closed disc vs closed cell rectangle.
inline bool cell_intersects_disc(const GridSpec& spec, int ix, int iz, const Footprint& f) {
  const double x0 = spec.x_min + ix * spec.cell_size;
  const double z0 = spec.z_min + iz * spec.cell_size;
  const double dx = f.x - std::clamp(f.x, x0, x0 + spec.cell_size);
  const double dz = f.z - std::clamp(f.z, z0, z0 + spec.cell_size);
  return dx * dx + dz * dz <= f.radius * f.radius;
}

/// Calls fn(ix, iz) for every in-range cell the footprint disc touches.
template <typename Fn>
void for_each_disc_cell(const GridSpec& spec, const Footprint& f, Fn&& fn) {
  const int ix0 = std::max(0, static_cast<int>(std::floor((f.x - f.radius - spec.x_min) / spec.cell_size)));
  const int ix1 = std::min(spec.nx - 1, static_cast<int>(std::floor((f.x + f.radius - spec.x_min) / spec.cell_size)));
  const int iz0 = std::max(0, static_cast<int>(std::floor((f.z - f.radius - spec.z_min) / spec.cell_size)));
  const int iz1 = std::min(spec.nz - 1, static_cast<int>(std::floor((f.z + f.radius - spec.z_min) / spec.cell_size)));
  for (int iz = iz0; iz <= iz1; ++iz) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      if (cell_intersects_disc(spec, ix, iz, f)) fn(ix, iz);
    }
  }
}

inline bool footprint_inside(const GridSpec& spec, const Footprint& f) {
  return f.x - f.radius >= spec.x_min && f.x + f.radius <= spec.x_max() && f.z - f.radius >= spec.z_min &&
         f.z + f.radius <= spec.z_max();
}

/// Marks every cell the footprint touches as blocked. Idempotent.
inline void occupy(GroundGrid& grid, const Footprint& f) {
  if (!(f.radius > 0.0)) throw std::invalid_argument("occupy: footprint radius must be positive");
  if (!footprint_inside(grid.spec(), f)) throw std::out_of_range("occupy: footprint extends outside the grid");
  for_each_disc_cell(grid.spec(), f, [&](int ix, int iz) { grid.set(ix, iz, CellState::Blocked); });
}

/// Bird's-eye dump: 0 unknown, 128 blocked, 255 spawnable. Top row is the far edge.
inline GrayImage grid_to_image(const GroundGrid& grid) {
  GrayImage img(grid.nx(), grid.nz());
  for (int iz = 0; iz < grid.nz(); ++iz) {
    for (int ix = 0; ix < grid.nx(); ++ix) {
      std::uint8_t value = 0;
      switch (grid.at(ix, iz)) {
        case CellState::Unknown: value = 0; break;
        case CellState::Blocked: value = 128; break;
        case CellState::Spawnable: value = 255; break;
      }
      img(ix, grid.nz() - 1 - iz) = value;
    }
  }
  return img;
}

}  // namespace pedspawn

#endif  // PEDSPAWN_GROUND_GRID_HPP
