#include "xplorer/mapper.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace xpl {

void MapParams::validate(double f_des) const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(delta_map > f_des, "map.delta_map must exceed explorer.f_des");
  require((block_dims.array() > 0.0).all(), "map block dims must be positive");
  require(side_offset > 0.0 && corner_offset > 0.0, "map offsets must be positive");
  require(emit_rate > 0.0, "map.emit_rate must be > 0");
  require(dedup_radius >= 0.0, "map.dedup_radius must be >= 0");
  require(subdivisions >= 1, "map.subdivisions must be >= 1");
  require(corner_angle > 0.0 && corner_angle < kPi, "map.corner_angle must lie in (0, pi)");
  require(settle_time >= 0.0, "map.settle_time must be >= 0");
}

const char* to_string(BlockKind k) { return k == BlockKind::Side ? "SIDE" : "CORNER"; }

const char* to_string(Gate g) {
  switch (g) {
    case Gate::Skip: return "SKIP";
    case Gate::EmitSide: return "EMIT_SIDE";
    case Gate::EmitCorner: return "EMIT_CORNER";
  }
  return "?";
}

namespace {

Gate gate(double force, bool changed, bool flying, const MapParams& p) {
  if (!flying || !(force >= p.delta_map)) return Gate::Skip;
  return changed ? Gate::EmitCorner : Gate::EmitSide;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Gate mapping_gate(double body_force, Dir lambda, Dir lambda_prev, bool flying,
                  const MapParams& p) {
  return gate(body_force, lambda != lambda_prev, flying, p);
}

int points_per_block(int n) {
  const int outer = (n + 1) * (n + 1) * (n + 1);
  const int inner = (n - 1) * (n - 1) * (n - 1);
  return outer - inner;
}

std::vector<Vec3> block_points(const Block& b, int n) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(points_per_block(n)));
  const Mat3 rz = rot_z(b.yaw);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        const bool surface = i == 0 || i == n || j == 0 || j == n || k == 0 || k == n;
        if (!surface) continue;
        const Vec3 frac(static_cast<double>(i) / n - 0.5, static_cast<double>(j) / n - 0.5,
                        static_cast<double>(k) / n - 0.5);
        pts.push_back(b.center + rz * frac.cwiseProduct(b.dims));
      }
    }
  }
  return pts;
}

Block side_block(const Vec3& pose, double psi, const ContactNormal& cn, const MapParams& p) {
  const Vec3 n_body = normal_vector(cn);
  const Mat3 rz = rot_z(psi);
  Block b;
  b.kind = BlockKind::Side;
  b.dims = p.block_dims;
  b.center = pose + p.side_offset * (rz * n_body);
  const Vec3 tangent = rz * Vec3(-n_body.y(), n_body.x(), 0.0);
  b.yaw = std::atan2(tangent.y(), tangent.x());
  return b;
}

Block corner_block(const Vec3& pose, const Vec2& move_prev, const Vec2& move_now,
                   const MapParams& p) {
  Vec2 diag = move_prev - move_now;
  const double s = cross2(move_prev, move_now) >= 0.0 ? 1.0 : -1.0;
  if (diag.norm() < 1e-9) diag = move_now;
  diag = s * diag.normalized();
  Block b;
  b.kind = BlockKind::Corner;
  b.dims = p.block_dims;
  b.center = pose + p.corner_offset * Vec3(diag.x(), diag.y(), 0.0);
  b.yaw = std::atan2(move_now.y(), move_now.x());
  return b;
}

void write_ply(const MapCloud& cloud, std::ostream& out) {
  out << "ply\n"
      << "format ascii 1.0\n";
  if (!cloud.scenario.empty()) out << "comment scenario " << cloud.scenario << "\n";
  out << "element vertex " << cloud.points.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "end_header\n";
  std::array<char, 32> buf{};
  for (const auto& p : cloud.points) {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(p[k])) throw std::runtime_error("non-finite map point");
      const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), p[k],
                                   std::chars_format::general, 6);
      out.write(buf.data(), r.ptr - buf.data());
      out.put(k < 2 ? ' ' : '\n');
    }
  }
}

void write_ply_file(const MapCloud& cloud, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  try {
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open " + tmp.string());
      write_ply(cloud, f);
      f.flush();
      if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t j = line.find(' ', i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    if (end > i) out.push_back(line.substr(i, end - i));
    i = end;
  }
  return out;
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw std::runtime_error("ply line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Vec3> read_ply(std::istream& in) {
  std::string line;
  std::size_t ln = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) bad(ln + 1, std::string("unexpected end of file, expected ") + what);
    ++ln;
    if (!line.empty() && line.back() == '\r') bad(ln, "carriage return not allowed");
  };
  next("'ply'");
  if (line != "ply") bad(ln, "magic must be 'ply'");
  next("format");
  if (line != "format ascii 1.0") bad(ln, "format must be 'format ascii 1.0'");
  next("element");
  while (line.rfind("comment", 0) == 0) next("element");
  const auto el = split_ws(line);
  if (el.size() != 3 || el[0] != "element" || el[1] != "vertex") bad(ln, "expected 'element vertex N'");
  long count = -1;
  {
    const auto r = std::from_chars(el[2].data(), el[2].data() + el[2].size(), count);
    if (r.ec != std::errc() || r.ptr != el[2].data() + el[2].size() || count < 0) {
      bad(ln, "bad vertex count");
    }
  }
  for (const char* axis : {"x", "y", "z"}) {
    next("property");
    if (line != std::string("property float ") + axis) {
      bad(ln, std::string("expected 'property float ") + axis + "'");
    }
  }
  next("end_header");
  if (line != "end_header") bad(ln, "expected 'end_header'");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    next("vertex");
    const auto tok = split_ws(line);
    if (tok.size() != 3) bad(ln, "vertex line needs exactly 3 values");
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      double v = 0.0;
      const auto r = std::from_chars(tok[a].data(), tok[a].data() + tok[a].size(), v);
      if (r.ec != std::errc() || r.ptr != tok[a].data() + tok[a].size() || !std::isfinite(v)) {
        bad(ln, "bad coordinate '" + std::string(tok[a]) + "'");
      }
      p[a] = v;
    }
    pts.push_back(p);
  }
  if (std::getline(in, line)) bad(ln + 1, "trailing data after declared vertices");
  return pts;
}

std::vector<Vec3> read_ply_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return read_ply(f);
}

namespace {

double dist_to_boundary(const Polygon& poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  const auto& vs = poly.vertices;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Vec2& a = vs[i];
    const Vec2& b = vs[(i + 1) % vs.size()];
    const Vec2 ab = b - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    d = std::min(d, (p - (a + t * ab)).norm());
  }
  return d;
}

}  // namespace

MapMetrics map_metrics(const MapCloud& cloud, const Environment& truth, double thickness) {
  MapMetrics m;
  if (cloud.points.empty() || truth.obstacles.empty()) {
    m.est_x = m.est_y = m.area_accuracy = m.hausdorff = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  const Polygon& poly = truth.obstacles.front();
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& v : poly.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  m.true_x = hi.x() - lo.x();
  m.true_y = hi.y() - lo.y();
  Vec2 plo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 phi = -plo;
  for (const auto& p : cloud.points) {
    plo = plo.cwiseMin(p.head<2>());
    phi = phi.cwiseMax(p.head<2>());
  }
  m.est_x = phi.x() - plo.x() - thickness;
  m.est_y = phi.y() - plo.y() - thickness;
  const double true_area = m.true_x * m.true_y;
  const double est_area = m.est_x * m.est_y;
  m.area_accuracy = 100.0 * (1.0 - std::abs(est_area - true_area) / true_area);

  double h = 0.0;
  for (const auto& p : cloud.points) h = std::max(h, dist_to_boundary(poly, p.head<2>()));
  const auto& vs = poly.vertices;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Vec2& a = vs[i];
    const Vec2& b = vs[(i + 1) % vs.size()];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / 0.005)));
    for (int k = 0; k <= n; ++k) {
      const Vec2 q = a + (b - a) * (static_cast<double>(k) / n);
      double d = std::numeric_limits<double>::infinity();
      for (const auto& p : cloud.points) d = std::min(d, (p.head<2>() - q).norm());
      h = std::max(h, d);
    }
  }
  m.hausdorff = h;
  m.defined = true;
  return m;
}

Mapper::Mapper(MapParams p) : p_(std::move(p)) {}

bool Mapper::add(const Block& b) {
  for (const auto& o : cloud_.blocks) {
    if (o.kind == b.kind && (o.center - b.center).norm() < p_.dedup_radius) {
      ++cloud_.suppressed;
      return false;
    }
  }
  cloud_.blocks.push_back(b);
  const auto pts = block_points(b, p_.subdivisions);
  cloud_.points.insert(cloud_.points.end(), pts.begin(), pts.end());
  ++cloud_.emit_count;
  return true;
}

void Mapper::step(const Vec3& pose, const Mat3& R, const ExplorerState& ex, double force_mag,
                  bool flying, double dt) {
  clock_ += dt;
  accum_ += dt;
  const double period = 1.0 / p_.emit_rate;
  if (accum_ + 1e-12 < period) return;
  accum_ -= period;
  if (ex.gamma != 3 || !one_hot(ex.C_n)) {
    pending_.clear();
    traverse_since_ = -1.0;
    return;
  }
  if (traverse_since_ < 0.0) traverse_since_ = clock_;
  while (!pending_.empty() && clock_ - pending_.front().first >= p_.settle_time - 1e-9) {
    add(pending_.front().second);
    pending_.pop_front();
  }
  const Vec3 mv = R * dir_vector(ex.lambda);
  const Vec2 heading = mv.head<2>().normalized();
  const bool changed =
      has_heading_ && std::abs(std::atan2(cross2(heading_, heading), heading_.dot(heading))) >
                          p_.corner_angle;
  const Gate g = gate(force_mag, changed, flying, p_);
  if (g == Gate::Skip) return;
  if (g == Gate::EmitCorner) add(corner_block(pose, heading_, heading, p_));
  heading_ = heading;
  has_heading_ = true;
  if (clock_ - traverse_since_ < p_.settle_time - 1e-9) return;
  pending_.emplace_back(clock_, side_block(pose, yaw_of(R), ex.C_n, p_));
}

}  // namespace xpl
