// SPDX-License-Identifier: Apache-2.0
//
// Orientation-aware occupancy grid. Cells carry a kind (free / blocked /
// waveguide / crossing), the owning net or instance, the local waveguide
// heading with a locally-straight flag (crossing legality needs both), a
// reservation tag for port access corridors, and a congestion history
// counter for negotiated rip-up-and-reroute.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "waveroute/geom.hpp"

namespace waveroute {

enum class CellKind : std::uint8_t { kFree = 0, kBlocked = 1, kWave = 2, kCross = 3 };

// One committed waveguide crossing: two perpendicular straight nets sharing
// a footprint square.
struct CrossingRecord {
  Vec2 center;
  double size = 0.0;
  int net_a = -1; // the crossed (pre-existing) net
  int net_b = -1; // the inserting net
  Dir8 dir_a = 0;
  Dir8 dir_b = 0;
  std::vector<std::int32_t> cells;   // every cell of the footprint square
  std::vector<std::int32_t> arm_a;   // net_a centerline cells inside the square
  std::vector<std::int32_t> arm_b;   // net_b centerline cells inside the square
  bool active = true;
};

// A crossing the router decided to insert while solving one net.
struct CrossingEvent {
  Vec2 center;
  int other_net = -1;
  double size = 0.0;
  Dir8 our_dir = 0;
};

struct CommitRecord {
  std::vector<std::int32_t> cells;
  std::vector<int> crossings; // indices into GridMap::crossings
};

// Returned by rip_up: crossings that lost one arm; the surviving net's
// stored geometry should demote the matching crossing segment to a plain
// straight.
struct DowngradedCrossing {
  int surviving_net = -1;
  Vec2 center;
};

class GridMap {
 public:
  GridMap() = default;
  GridMap(double die_w, double die_h, double pitch);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double pitch() const { return pitch_; }
  double die_w() const { return die_w_; }
  double die_h() const { return die_h_; }
  std::size_t cell_count() const { return state_.size(); }

  bool in_bounds(int i, int j) const { return i >= 0 && i < nx_ && j >= 0 && j < ny_; }
  std::int32_t index(int i, int j) const { return j * nx_ + i; }
  Vec2 center(int i, int j) const {
    return {(i + 0.5) * pitch_, (j + 0.5) * pitch_};
  }
  void cell_of(const Vec2& p, int& i, int& j) const {
    i = static_cast<int>(std::floor(p.x / pitch_));
    j = static_cast<int>(std::floor(p.y / pitch_));
  }

  CellKind kind(std::int32_t c) const { return static_cast<CellKind>(state_[c] & 3); }
  Dir8 orient(std::int32_t c) const { return (state_[c] >> 2) & 7; }
  bool straight(std::int32_t c) const { return (state_[c] & 0x20) != 0; }
  std::int32_t owner(std::int32_t c) const { return owner_[c]; }
  std::int32_t reserved_for(std::int32_t c) const { return reserved_[c]; }
  float history(std::int32_t c) const { return history_[c]; }
  void add_history(std::int32_t c, float inc) { history_[c] += inc; }

  // Device / sub-module blockage: every partially covered cell is blocked
  // (conservative). owner_id tags the blocking instance.
  void block_rect(const Rect& r, std::int32_t owner_id);
  // Same, but leaves committed waveguide/crossing cells untouched (used for
  // late blockages added onto a map that already carries routes).
  void block_rect_keep_routes(const Rect& r, std::int32_t owner_id);

  // Port-access reservation. Returns false (leaving cells untouched beyond
  // the ones already set) if a cell is already reserved for another port;
  // conflicts gets the clashing port ids.
  bool reserve_rect(const Rect& r, std::int32_t port_uid, std::vector<std::int32_t>* conflicts);
  void clear_reservation(std::int32_t port_uid, const Rect& r);

  // Cells conservatively covered by the swept width of a segment.
  void cells_covering(const Segment& s, std::vector<std::int32_t>& out) const;

  // Commits a solved net: marks waveguide cells, registers crossings.
  // Returns false if any cell was not claimable (router bug).  Blocked
  // cells owned by `pardon_blocked_owner` are skipped untouched: a port
  // access stub legitimately brushes its own device footprint.
  bool commit_route(int net, const std::vector<Segment>& path,
                    const std::vector<CrossingEvent>& crossings,
                    std::int32_t pardon_blocked_owner = -2);

  // Frees a net's cells, bumps history on each freed cell, removes its
  // crossings; crossings with a surviving other arm are downgraded to plain
  // waveguide tags and reported.
  std::vector<DowngradedCrossing> rip_up(int net, float history_inc);

  bool is_committed(int net) const { return commits_.count(net) != 0; }
  const CommitRecord* commit_record(int net) const;
  const std::vector<CrossingRecord>& crossings() const { return crossings_; }
  // Index of the active crossing covering a cell, or -1.
  int crossing_at(std::int32_t c) const {
    auto it = cross_at_.find(c);
    return it == cross_at_.end() ? -1 : it->second;
  }

  // Count of crossings currently touching a net (either arm).
  int crossing_count(int net) const;

  // Debug visualization (binary PGM; free=white, blocked=black).
  bool dump_pgm(const std::string& path) const;

 private:
  void set_cell(std::int32_t c, CellKind k, Dir8 o, bool straight_flag, std::int32_t owner_id) {
    state_[c] = static_cast<std::uint8_t>(static_cast<int>(k) | (o << 2) |
                                          (straight_flag ? 0x20 : 0));
    owner_[c] = owner_id;
  }

  double die_w_ = 0.0;
  double die_h_ = 0.0;
  double pitch_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> state_;
  std::vector<std::int32_t> owner_;
  std::vector<std::int32_t> reserved_;
  std::vector<float> history_;
  std::vector<CrossingRecord> crossings_;
  std::unordered_map<int, CommitRecord> commits_;
  std::unordered_map<std::int32_t, int> cross_at_;
};

} // namespace waveroute
