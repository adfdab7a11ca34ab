#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "binseg/model_database.h"
#include "binseg/stable_poses.h"
#include "binseg/types.h"

namespace binseg {

using Rng = std::mt19937_64;

struct Interval {
  double lo = 0, hi = 0;
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Bin interior spans [-width/2, width/2] x [-depth/2, depth/2] with its floor
// at z = 0; the table top sits at z = -floor_thickness.
struct BinGeometry {
  double width = 0.40;
  double depth = 0.30;
  double height = 0.12;
  double wall_thickness = 0.01;
  double floor_thickness = 0.01;
};

struct TableGeometry {
  double width = 2.0;
  double depth = 2.0;
  double thickness = 0.05;
};

struct GenConfig {
  double lambda_fg = 7.5;
  int max_fg = 10;
  int min_fg = 1;

  BinGeometry bin;
  TableGeometry table;

  // Camera position in spherical coordinates about the bin floor center.
  Interval radius{0.6, 0.9};
  Interval elevation{std::numbers::pi / 3, std::numbers::pi / 2};
  Interval azimuth{0.0, 2 * std::numbers::pi};
  Interval roll{-std::numbers::pi / 18, std::numbers::pi / 18};

  Interval fx{522.5, 577.5};
  Interval fy{522.5, 577.5};
  Interval cx{243.2, 268.8};
  Interval cy{182.4, 201.6};
  int width = 512;
  int height = 384;

  double mask_threshold = 1e-4;
  std::uint64_t master_seed = 0;

  double cell_size = 0.002;
  int placement_attempts = 100;
  PoseWeighting pose_weighting = PoseWeighting::kFacetArea;

  // Throws ArgumentError describing the first violated constraint.
  void validate() const;
};

// Independent per-scene stream: regenerating scene i never depends on any
// other scene.
std::uint64_t sceneSeed(std::uint64_t master_seed, std::uint64_t scene_index);

double uniform(Rng& rng, const Interval& interval);

// Poisson(lambda) draw, redrawn until it lands in [min, max].
int sampleObjectCount(Rng& rng, double lambda, int max, int min);

// Surface height over the bin interior on a regular grid.
class HeightField {
 public:
  HeightField(const BinGeometry& bin, double cell_size);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cellX() const { return cell_x_; }
  double cellY() const { return cell_y_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double floor() const { return floor_; }

  double& at(int ix, int iy) { return heights_[std::size_t(iy) * nx_ + ix]; }
  double at(int ix, int iy) const { return heights_[std::size_t(iy) * nx_ + ix]; }
  double& at(std::size_t cell) { return heights_[cell]; }
  double at(std::size_t cell) const { return heights_[cell]; }
  std::size_t cellCount() const { return heights_.size(); }

  void reset();

 private:
  int nx_, ny_;
  double cell_x_, cell_y_;
  double x0_, y0_;
  double floor_ = 0.0;
  std::vector<double> heights_;
};

// Vertical extent of a posed mesh inside one heightfield column.
struct FootprintCell {
  std::size_t cell;
  double z_lo, z_hi;
};

// Cells whose column the posed mesh's surface intersects, with the exact
// z range of the surface inside each column (triangles clipped to the
// column). Sorted by cell index.
std::vector<FootprintCell> computeFootprint(const HeightField& field,
                                            const TriangleMesh& mesh,
                                            const RigidTransform& pose);

// Drops a mesh with the given orientation so that its x-y bounding-box center
// lands on `xy`: it descends until it touches the heightfield, which is then
// raised by its upper surface. Returns the resting pose.
RigidTransform dropAt(HeightField& field, const TriangleMesh& mesh,
                      const Mat3& rotation, const Eigen::Vector2d& xy);

class PlacementError : public Error {
 public:
  using Error::Error;
};

// Places models one at a time onto the heap.
class Settler {
 public:
  virtual ~Settler() = default;
  virtual void reset() = 0;
  // Throws PlacementError when the model cannot be placed.
  virtual RigidTransform place(const ModelEntry& model, Rng& rng) = 0;
};

// Quasi-static settler: stable pose by probability, uniform yaw, uniform
// in-bin position, then dropAt() on the heightfield.
class HeightFieldSettler : public Settler {
 public:
  HeightFieldSettler(const BinGeometry& bin, double cell_size, int attempts);
  void reset() override { field_.reset(); }
  RigidTransform place(const ModelEntry& model, Rng& rng) override;
  const HeightField& field() const { return field_; }

 private:
  HeightField field_;
  BinGeometry bin_;
  int attempts_;
};

RigidTransform settleObject(HeightField& field, const BinGeometry& bin,
                            const TriangleMesh& mesh,
                            const std::vector<StablePose>& poses, Rng& rng,
                            int attempts = 100);

// Camera on a sphere about the bin floor center, optical axis through it,
// then rolled about the axis.
CameraModel sampleCamera(Rng& rng, const GenConfig& config);
// Look-at pose for explicit spherical coordinates.
RigidTransform lookAtPose(double radius, double elevation, double azimuth,
                          double roll);

inline const std::string kTableId = "__table__";
inline const std::string kBinId = "__bin__";

TriangleMesh makeBinMesh(const BinGeometry& bin);
TriangleMesh makeTableMesh(const BinGeometry& bin, const TableGeometry& table);

struct HeapLog {
  int sampled_count = 0;
  int placement_failures = 0;
  int resamples = 0;
  std::vector<std::string> warnings;
};

// Full state sample: object count, uniform model choice with replacement,
// sequential settling, fixed table and bin, random camera. The scene is
// fully determined by `seed`, which is recorded in the state.
SceneState sampleHeapState(std::uint64_t seed, const GenConfig& config,
                           const ModelDatabase& db, HeapLog* log = nullptr,
                           Settler* settler = nullptr);

}  // namespace binseg
