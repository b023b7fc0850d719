#include "automap/objects/object_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace automap::objects {

std::vector<Blob> group(std::span<const SpriteEntry> sprites, FrameIndex frame) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < sprites.size(); ++i) {
    if (sprites[i].visible) idx.push_back(i);
  }
  const std::size_t n = idx.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  constexpr int kReach = kTilePx + 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = sprites[idx[i]];
      const auto& b = sprites[idx[j]];
      if (std::abs(a.x - b.x) <= kReach && std::abs(a.y - b.y) <= kReach) parent[find(i)] = find(j);
    }
  }

  std::vector<Blob> blobs;
  std::vector<int> blob_of(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (blob_of[root] < 0) {
      blob_of[root] = static_cast<int>(blobs.size());
      blobs.emplace_back();
    }
    blobs[static_cast<std::size_t>(blob_of[root])].members.push_back(sprites[idx[i]]);
  }
  for (Blob& b : blobs) {
    b.frame = frame;
    int max_x = std::numeric_limits<int>::min(), max_y = std::numeric_limits<int>::min();
    b.x = b.y = std::numeric_limits<int>::max();
    for (const auto& s : b.members) {
      b.x = std::min(b.x, s.x);
      b.y = std::min(b.y, s.y);
      max_x = std::max(max_x, s.x + kTilePx);
      max_y = std::max(max_y, s.y + kTilePx);
    }
    b.width = max_x - b.x;
    b.height = max_y - b.y;
    for (const auto& s : b.members) b.layout.push_back({s.x - b.x, s.y - b.y, s.tile, s.flip_h, s.flip_v});
    std::sort(b.layout.begin(), b.layout.end());
  }
  std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return std::tie(a.y, a.x, a.layout) < std::tie(b.y, b.x, b.layout);
  });
  return blobs;
}

double layout_similarity(std::span<const LayoutCell> a, std::span<const LayoutCell> b) {
  using Cell = std::tuple<int, int, TileKey>;
  auto to_set = [](std::span<const LayoutCell> l) {
    std::vector<Cell> s;
    for (const auto& c : l) s.emplace_back(c.dx, c.dy, c.key);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  const auto sa = to_set(a), sb = to_set(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<Cell> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const std::size_t uni = sa.size() + sb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(uni);
}

double match_weight(const TrackHead& track, const Blob& blob, const MatchParams& params) {
  const double dist = std::hypot(blob.x - track.x, blob.y - track.y);
  if (dist > params.max_dist) return -1.0;
  return params.alpha * (1.0 - dist / params.max_dist) + params.beta * layout_similarity(track.layout, blob.layout);
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost.front().size();
  if (m < n) throw Error("hungarian: more rows than columns");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Potentials and the column-to-row assignment, 1-based with a virtual column 0.
  std::vector<double> u(n + 1), v(m + 1);
  std::vector<std::size_t> p(m + 1), way(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

std::vector<int> match(std::span<const TrackHead> tracks, std::span<const Blob> blobs, const MatchParams& params) {
  std::vector<int> out(blobs.size(), -1);
  if (blobs.empty() || tracks.empty()) return out;
  // Rows are blobs; columns are tracks followed by one "new track" column per blob.
  const std::size_t cols = tracks.size() + blobs.size();
  std::vector<std::vector<double>> cost(blobs.size(), std::vector<double>(cols, 0.0));
  std::vector<std::vector<double>> weight(blobs.size(), std::vector<double>(tracks.size()));
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      weight[i][j] = match_weight(tracks[j], blobs[i], params);
      if (weight[i][j] > 0.0) cost[i][j] = -weight[i][j];
    }
  }
  const auto assign = hungarian(cost);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const int j = assign[i];
    if (j >= 0 && static_cast<std::size_t>(j) < tracks.size() && weight[i][static_cast<std::size_t>(j)] > 0.0) out[i] = j;
  }
  return out;
}

void Tracker::update(FrameIndex t, int room, std::span<const Blob> blobs) {
  // Retire tracks that have coasted too long.
  std::erase_if(live_, [&](std::size_t k) { return t - tracks_[k].last_seen() - 1 > params_.coast; });

  std::vector<TrackHead> heads;
  heads.reserve(live_.size());
  for (std::size_t k : live_) {
    const auto& f = tracks_[k].frames.back();
    heads.push_back({f.x, f.y, f.layout});
  }
  const auto assign = match(heads, blobs, params_.match);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const Blob& b = blobs[i];
    TrackFrame f{t, b.x, b.y, b.layout};
    if (assign[i] >= 0) {
      tracks_[live_[static_cast<std::size_t>(assign[i])]].frames.push_back(std::move(f));
    } else {
      ObjectTrack tr;
      tr.id = static_cast<int>(tracks_.size());
      tr.room = room;
      tr.frames.push_back(std::move(f));
      tracks_.push_back(std::move(tr));
      live_.push_back(tracks_.size() - 1);
    }
  }
}

void Tracker::end_room() { live_.clear(); }

bool Exclusions::matches(std::span<const LayoutCell> layout) const {
  if (signatures.empty()) return false;
  std::vector<TileKey> keys;
  for (const auto& c : layout) keys.push_back(c.key);
  std::sort(keys.begin(), keys.end());
  return std::find(signatures.begin(), signatures.end(), keys) != signatures.end();
}

Exclusions parse_exclusions(std::string_view text) {
  Exclusions ex;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word, list, extra;
    if (!(ls >> word)) continue;
    if (word != "exclude" || !(ls >> list) || (ls >> extra)) {
      throw ParseError("expected 'exclude p:pal:bank[,p:pal:bank...]'", line_no);
    }
    std::vector<TileKey> sig;
    std::size_t start = 0;
    while (start <= list.size()) {
      const std::size_t comma = list.find(',', start);
      const std::string part = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      try {
        sig.push_back(parse_tile_key(part));
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no, static_cast<int>(line.find(list) + start + 1));
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    std::sort(sig.begin(), sig.end());
    ex.signatures.push_back(std::move(sig));
  }
  return ex;
}

void apply_exclusions(std::span<ObjectTrack> tracks, const Exclusions& exclusions) {
  for (auto& tr : tracks) {
    tr.excluded = std::any_of(tr.frames.begin(), tr.frames.end(),
                              [&](const TrackFrame& f) { return exclusions.matches(f.layout); });
  }
}

void place(std::span<const ObjectTrack> tracks, std::span<tiles::NormalizedRoom> rooms) {
  for (auto& r : rooms) r.placements.clear();
  for (const auto& tr : tracks) {
    if (tr.excluded || tr.room < 0 || tr.frames.empty()) continue;
    auto it = std::find_if(rooms.begin(), rooms.end(), [&](const tiles::NormalizedRoom& r) { return r.id == tr.room; });
    if (it == rooms.end()) continue;
    const auto& f = tr.frames.front();
    it->placements.push_back({tr.id, f.frame, f.x + kTilePx * it->offset_x, f.y + kTilePx * it->offset_y, f.layout});
  }
}

}  // namespace automap::objects
