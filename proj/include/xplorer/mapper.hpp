#pragma once

#include "xplorer/explorer.hpp"
#include "xplorer/math.hpp"
#include "xplorer/sim_core.hpp"

#include <deque>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace xpl {

struct MapParams {
  double delta_map = 1.51;
  Vec3 block_dims{0.25, 0.08, 0.5};  // length along the surface, thickness, height
  double side_offset = 0.21;
  double corner_offset = 0.417;
  double emit_rate = 30.0;
  double dedup_radius = 0.02;
  int subdivisions = 1;  // 1 samples the 8 box corners only
  double corner_angle = kPi / 4;  // heading change that counts as a new move direction
  double settle_time = 0.4;  // side blocks are held this long and dropped if a turn starts

  void validate(double f_des) const;
};

enum class BlockKind { Side, Corner };
enum class Gate { Skip, EmitSide, EmitCorner };

const char* to_string(BlockKind k);
const char* to_string(Gate g);

struct Block {
  Vec3 center = Vec3::Zero();
  Vec3 dims = Vec3::Zero();
  double yaw = 0.0;  // direction of the length axis
  BlockKind kind = BlockKind::Side;
};

struct MapCloud {
  std::vector<Vec3> points;
  std::vector<Block> blocks;
  std::string scenario;
  long emit_count = 0;
  long suppressed = 0;
};

Gate mapping_gate(double body_force, Dir lambda, Dir lambda_prev, bool flying, const MapParams& p);

std::vector<Vec3> block_points(const Block& b, int subdivisions = 1);
int points_per_block(int subdivisions);

// Side block along the contact normal, rotated into the world by psi.
Block side_block(const Vec3& pose, double psi, const ContactNormal& cn, const MapParams& p);

// Corner block along the diagonal between two world-frame move directions.
Block corner_block(const Vec3& pose, const Vec2& move_prev, const Vec2& move_now,
                   const MapParams& p);

void write_ply(const MapCloud& cloud, std::ostream& out);
void write_ply_file(const MapCloud& cloud, const std::filesystem::path& path);

// Strict ASCII PLY parser for x/y/z float vertex files; throws on any deviation.
std::vector<Vec3> read_ply(std::istream& in);
std::vector<Vec3> read_ply_file(const std::filesystem::path& path);

struct MapMetrics {
  bool defined = false;
  double est_x = 0.0;
  double est_y = 0.0;
  double true_x = 0.0;
  double true_y = 0.0;
  double area_accuracy = 0.0;  // percent
  double hausdorff = 0.0;      // m
};

MapMetrics map_metrics(const MapCloud& cloud, const Environment& truth, double block_thickness);

class Mapper {
 public:
  explicit Mapper(MapParams p);
  // Called every control tick; emits at emit_rate from a time accumulator. Side blocks are
  // skipped for settle_time after a traverse begins and held for settle_time before commit,
  // so the ends of each contact segment, where the guards ride over a vertex, are trimmed.
  void step(const Vec3& pose, const Mat3& R, const ExplorerState& ex, double force_mag,
            bool flying, double dt);
  bool add(const Block& b);

  const MapCloud& cloud() const { return cloud_; }
  MapCloud& cloud() { return cloud_; }
  const MapParams& params() const { return p_; }

 private:
  MapParams p_;
  MapCloud cloud_;
  double accum_ = 0.0;
  double clock_ = 0.0;
  double traverse_since_ = -1.0;
  std::deque<std::pair<double, Block>> pending_;
  bool has_heading_ = false;
  Vec2 heading_ = Vec2::UnitX();
};

}  // namespace xpl
