// SPDX-License-Identifier: Apache-2.0

#include "waveroute/grid.hpp"

#include <algorithm>
#include <cmath>

namespace waveroute {

namespace {
// Area-overlap guard: boundary touches (zero-area intersections) do not
// claim a cell.
constexpr double kAreaEps = 1e-9;
} // namespace

GridMap::GridMap(double die_w, double die_h, double pitch)
    : die_w_(die_w), die_h_(die_h), pitch_(pitch) {
  nx_ = std::max(1, static_cast<int>(std::ceil(die_w / pitch - kAreaEps)));
  ny_ = std::max(1, static_cast<int>(std::ceil(die_h / pitch - kAreaEps)));
  const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
  state_.assign(n, 0);
  owner_.assign(n, -1);
  reserved_.assign(n, -1);
  history_.assign(n, 0.0f);
}

void GridMap::block_rect(const Rect& r, std::int32_t owner_id) {
  const int i0 = std::max(0, static_cast<int>(std::floor(r.lo.x / pitch_ + kAreaEps)));
  const int j0 = std::max(0, static_cast<int>(std::floor(r.lo.y / pitch_ + kAreaEps)));
  const int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil(r.hi.x / pitch_ - kAreaEps)) - 1);
  const int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil(r.hi.y / pitch_ - kAreaEps)) - 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      set_cell(index(i, j), CellKind::kBlocked, 0, false, owner_id);
}

void GridMap::block_rect_keep_routes(const Rect& r, std::int32_t owner_id) {
  const int i0 = std::max(0, static_cast<int>(std::floor(r.lo.x / pitch_ + kAreaEps)));
  const int j0 = std::max(0, static_cast<int>(std::floor(r.lo.y / pitch_ + kAreaEps)));
  const int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil(r.hi.x / pitch_ - kAreaEps)) - 1);
  const int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil(r.hi.y / pitch_ - kAreaEps)) - 1);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const std::int32_t c = index(i, j);
      if (kind(c) == CellKind::kWave || kind(c) == CellKind::kCross) continue;
      set_cell(c, CellKind::kBlocked, 0, false, owner_id);
    }
  }
}

bool GridMap::reserve_rect(const Rect& r, std::int32_t port_uid,
                           std::vector<std::int32_t>* conflicts) {
  const int i0 = std::max(0, static_cast<int>(std::floor(r.lo.x / pitch_ + kAreaEps)));
  const int j0 = std::max(0, static_cast<int>(std::floor(r.lo.y / pitch_ + kAreaEps)));
  const int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil(r.hi.x / pitch_ - kAreaEps)) - 1);
  const int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil(r.hi.y / pitch_ - kAreaEps)) - 1);
  bool ok = true;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const std::int32_t c = index(i, j);
      if (reserved_[c] >= 0 && reserved_[c] != port_uid) {
        ok = false;
        if (conflicts &&
            std::find(conflicts->begin(), conflicts->end(), reserved_[c]) == conflicts->end())
          conflicts->push_back(reserved_[c]);
        continue;
      }
      reserved_[c] = port_uid;
    }
  }
  return ok;
}

void GridMap::clear_reservation(std::int32_t port_uid, const Rect& r) {
  const int i0 = std::max(0, static_cast<int>(std::floor(r.lo.x / pitch_ + kAreaEps)));
  const int j0 = std::max(0, static_cast<int>(std::floor(r.lo.y / pitch_ + kAreaEps)));
  const int i1 = std::min(nx_ - 1, static_cast<int>(std::ceil(r.hi.x / pitch_ - kAreaEps)) - 1);
  const int j1 = std::min(ny_ - 1, static_cast<int>(std::ceil(r.hi.y / pitch_ - kAreaEps)) - 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i)
      if (reserved_[index(i, j)] == port_uid) reserved_[index(i, j)] = -1;
}

void GridMap::cells_covering(const Segment& s, std::vector<std::int32_t>& out) const {
  out.clear();
  if (s.kind == SegKind::kCrossing) {
    // Area-overlap rule: a cell belongs to the footprint square when the
    // square intrudes past the cell boundary, i.e. the cell center lies
    // within half + pitch/2 of the square center on both axes.
    const Vec2 c = (s.start.pos + s.end.pos) * 0.5;
    const double h = s.size / 2.0 + pitch_ / 2.0 - kAreaEps;
    int i0, j0, i1, j1;
    cell_of({c.x - h - pitch_, c.y - h - pitch_}, i0, j0);
    cell_of({c.x + h + pitch_, c.y + h + pitch_}, i1, j1);
    for (int j = std::max(0, j0); j <= std::min(ny_ - 1, j1); ++j)
      for (int i = std::max(0, i0); i <= std::min(nx_ - 1, i1); ++i)
        if (std::abs(center(i, j).x - c.x) < h && std::abs(center(i, j).y - c.y) < h)
          out.push_back(index(i, j));
    return;
  }

  // Conservative sweep: a cell is claimed when its center lies within the
  // waveguide half-width plus the cell half-diagonal of the centerline, a
  // superset of every cell the drawn polygon can intersect.
  const double radius = s.width / 2.0 + pitch_ * (kSqrt2 / 2.0) - 1e-6;
  const std::vector<Vec2> line = seg_centerline(s, pitch_ * 0.05);
  const int span = static_cast<int>(std::ceil(radius / pitch_)) + 1;
  for (size_t k = 0; k + 1 < line.size(); ++k) {
    const Vec2 a = line[k];
    const Vec2 b = line[k + 1];
    const double len = dist(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (pitch_ * 0.5))));
    for (int t = 0; t <= steps; ++t) {
      const Vec2 p = a + (b - a) * (static_cast<double>(t) / steps);
      int ci, cj;
      cell_of(p, ci, cj);
      for (int j = std::max(0, cj - span); j <= std::min(ny_ - 1, cj + span); ++j)
        for (int i = std::max(0, ci - span); i <= std::min(nx_ - 1, ci + span); ++i)
          if (segment_point_distance(a, b, center(i, j)) < radius)
            out.push_back(index(i, j));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

const CommitRecord* GridMap::commit_record(int net) const {
  auto it = commits_.find(net);
  return it == commits_.end() ? nullptr : &it->second;
}

bool GridMap::commit_route(int net, const std::vector<Segment>& path,
                           const std::vector<CrossingEvent>& events,
                           std::int32_t pardon_blocked_owner) {
  CommitRecord rec;

  // Register crossings first so the trimmed straight pieces may brush the
  // already-claimed footprint cells without conflict.
  for (const CrossingEvent& ev : events) {
    CrossingRecord cr;
    cr.center = ev.center;
    cr.size = ev.size;
    cr.net_a = ev.other_net;
    cr.net_b = net;
    cr.dir_b = ev.our_dir;
    int ci, cj;
    cell_of(ev.center, ci, cj);
    if (!in_bounds(ci, cj)) return false;
    const std::int32_t cc = index(ci, cj);
    if (kind(cc) != CellKind::kWave || owner_[cc] != ev.other_net) return false;
    cr.dir_a = orient(cc);

    const double h = ev.size / 2.0 + pitch_ / 2.0 - kAreaEps;
    int i0, j0, i1, j1;
    cell_of({ev.center.x - h - pitch_, ev.center.y - h - pitch_}, i0, j0);
    cell_of({ev.center.x + h + pitch_, ev.center.y + h + pitch_}, i1, j1);
    for (int j = std::max(0, j0); j <= std::min(ny_ - 1, j1); ++j) {
      for (int i = std::max(0, i0); i <= std::min(nx_ - 1, i1); ++i) {
        if (std::abs(center(i, j).x - ev.center.x) >= h ||
            std::abs(center(i, j).y - ev.center.y) >= h)
          continue;
        const std::int32_t c = index(i, j);
        const bool on_a = kind(c) == CellKind::kWave && owner_[c] == ev.other_net;
        if (kind(c) != CellKind::kFree && !on_a) return false;
        if (on_a) cr.arm_a.push_back(c);
        cr.cells.push_back(c);
        set_cell(c, CellKind::kCross, cr.dir_b, false, net);
      }
    }
    // Our own centerline cells inside the square.
    int sx, sy;
    dir_cell_step(cr.dir_b, sx, sy);
    const int reach = static_cast<int>(std::floor(h / pitch_));
    for (int k = -reach; k <= reach; ++k) {
      const int i = ci + k * sx;
      const int j = cj + k * sy;
      if (in_bounds(i, j)) cr.arm_b.push_back(index(i, j));
    }
    const int idx = static_cast<int>(crossings_.size());
    crossings_.push_back(std::move(cr));
    for (std::int32_t c : crossings_.back().cells) cross_at_[c] = idx;
    rec.crossings.push_back(idx);
  }

  std::vector<std::int32_t> cells;
  for (const Segment& s : path) {
    if (s.kind == SegKind::kCrossing) continue;
    cells_covering(s, cells);
    const Dir8 d = snap_dir8(s.start.theta_deg);
    const bool str = s.kind == SegKind::kStraight;
    for (std::int32_t c : cells) {
      switch (kind(c)) {
        case CellKind::kFree:
          set_cell(c, CellKind::kWave, d, str, net);
          rec.cells.push_back(c);
          break;
        case CellKind::kWave:
          if (owner_[c] != net) return false;
          // Joint cell covered by two of our segments: a bend anywhere in
          // the cell makes it unusable as a crossing site.
          if (!str || orient(c) != d)
            set_cell(c, CellKind::kWave, orient(c), false, net);
          break;
        case CellKind::kCross: {
          auto it = cross_at_.find(c);
          if (it == cross_at_.end()) return false;
          const CrossingRecord& cr = crossings_[it->second];
          if (cr.net_a != net && cr.net_b != net) return false;
          break;
        }
        case CellKind::kBlocked:
          if (pardon_blocked_owner != -2 && owner_[c] == pardon_blocked_owner) break;
          return false;
      }
    }
  }
  std::sort(rec.cells.begin(), rec.cells.end());
  rec.cells.erase(std::unique(rec.cells.begin(), rec.cells.end()), rec.cells.end());
  // Incremental commits (access stubs first, the search path later) merge
  // into one record per net; rip_up releases everything at once.
  CommitRecord& dst = commits_[net];
  dst.cells.insert(dst.cells.end(), rec.cells.begin(), rec.cells.end());
  std::sort(dst.cells.begin(), dst.cells.end());
  dst.cells.erase(std::unique(dst.cells.begin(), dst.cells.end()), dst.cells.end());
  dst.crossings.insert(dst.crossings.end(), rec.crossings.begin(), rec.crossings.end());
  return true;
}

std::vector<DowngradedCrossing> GridMap::rip_up(int net, float history_inc) {
  std::vector<DowngradedCrossing> downgraded;
  auto it = commits_.find(net);
  if (it == commits_.end()) return downgraded;

  for (std::int32_t c : it->second.cells) {
    if (kind(c) == CellKind::kWave && owner_[c] == net) {
      set_cell(c, CellKind::kFree, 0, false, -1);
      history_[c] += history_inc;
    }
  }

  for (std::size_t x = 0; x < crossings_.size(); ++x) {
    CrossingRecord& cr = crossings_[x];
    if (!cr.active || (cr.net_a != net && cr.net_b != net)) continue;
    const int other = cr.net_a == net ? cr.net_b : cr.net_a;
    const Dir8 other_dir = cr.net_a == net ? cr.dir_b : cr.dir_a;
    const std::vector<std::int32_t>& other_arm = cr.net_a == net ? cr.arm_b : cr.arm_a;
    for (std::int32_t c : cr.cells) {
      set_cell(c, CellKind::kFree, 0, false, -1);
      history_[c] += history_inc;
      cross_at_.erase(c);
    }
    if (commits_.count(other)) {
      // Surviving arm keeps its straight waveguide tags; its geometry drops
      // the crossing square.
      CommitRecord& orec = commits_[other];
      for (std::int32_t c : other_arm) {
        if (kind(c) == CellKind::kFree) {
          set_cell(c, CellKind::kWave, other_dir, true, other);
          orec.cells.push_back(c);
        }
      }
      downgraded.push_back({other, cr.center});
    }
    cr.active = false;
  }

  commits_.erase(it);
  return downgraded;
}

int GridMap::crossing_count(int net) const {
  int n = 0;
  for (const CrossingRecord& cr : crossings_)
    if (cr.active && (cr.net_a == net || cr.net_b == net)) ++n;
  return n;
}

bool GridMap::dump_pgm(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  std::fprintf(f, "P5\n%d %d\n255\n", nx_, ny_);
  std::vector<unsigned char> row(nx_);
  for (int j = ny_ - 1; j >= 0; --j) {
    for (int i = 0; i < nx_; ++i) {
      const std::int32_t c = index(i, j);
      unsigned char v = 255;
      switch (kind(c)) {
        case CellKind::kFree: v = reserved_[c] >= 0 ? 210 : 255; break;
        case CellKind::kWave: v = 120; break;
        case CellKind::kCross: v = 60; break;
        case CellKind::kBlocked: v = 0; break;
      }
      row[i] = v;
    }
    std::fwrite(row.data(), 1, row.size(), f);
  }
  std::fclose(f);
  return true;
}

} // namespace waveroute
