#include "automap/merge/merge_engine.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace automap::merge {

RoomGrid RoomGrid::from(const tiles::NormalizedRoom& room, tiles::Representative rule) {
  return {room.width, room.height, room.representative_grid(rule)};
}

double similarity(const RoomGrid& a, const RoomGrid& b) {
  const int iw = std::min(a.width, b.width), ih = std::min(a.height, b.height);
  const long union_cells = static_cast<long>(a.width) * a.height + static_cast<long>(b.width) * b.height -
                           static_cast<long>(iw) * ih;
  if (union_cells == 0) return 1.0;
  long same = 0;
  for (int y = 0; y < ih; ++y) {
    for (int x = 0; x < iw; ++x) {
      if (a.cells[static_cast<std::size_t>(y) * a.width + x] == b.cells[static_cast<std::size_t>(y) * b.width + x]) ++same;
    }
  }
  return static_cast<double>(same) / static_cast<double>(union_cells);
}

double similarity(const tiles::NormalizedRoom& a, const tiles::NormalizedRoom& b) {
  return similarity(RoomGrid::from(a), RoomGrid::from(b));
}

std::vector<std::vector<double>> similarity_matrix(std::span<const RoomGrid> rooms) {
  const std::size_t n = rooms.size();
  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = similarity(rooms[i], rooms[j]);
  }
  return sim;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

std::vector<Cluster> suggest_from_matrix(const std::vector<std::vector<double>>& sim, double tau) {
  const int n = static_cast<int>(sim.size());
  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] >= tau) uf.unite(i, j);
    }
  }
  std::vector<Cluster> out;
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  for (int r = 0; r < n; ++r) {
    const int root = uf.find(r);
    if (index[static_cast<std::size_t>(root)] < 0) {
      index[static_cast<std::size_t>(root)] = static_cast<int>(out.size());
      out.push_back({static_cast<int>(out.size()), {}, {}, true});
    }
    out[static_cast<std::size_t>(index[static_cast<std::size_t>(root)])].members.push_back(r);
  }
  for (auto& c : out) {
    c.similarity.assign(c.members.size(), std::vector<double>(c.members.size()));
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      for (std::size_t j = 0; j < c.members.size(); ++j) {
        c.similarity[i][j] = sim[static_cast<std::size_t>(c.members[i])][static_cast<std::size_t>(c.members[j])];
      }
    }
  }
  return out;
}

std::vector<Cluster> suggest(std::span<const RoomGrid> rooms, double tau) {
  return suggest_from_matrix(similarity_matrix(rooms), tau);
}

// ---------------------------------------------------------------------------
// Catalog

Catalog::Catalog(int room_count, std::vector<Cluster> suggestions)
    : room_count_(room_count), group_of_(static_cast<std::size_t>(room_count)), clusters_(std::move(suggestions)) {
  std::iota(group_of_.begin(), group_of_.end(), 0);
  std::vector<int> seen(static_cast<std::size_t>(room_count), 0);
  for (const auto& c : clusters_) {
    next_cluster_ = std::max(next_cluster_, c.id + 1);
    for (int r : c.members) {
      if (r < 0 || r >= room_count) throw Error("cluster " + c.name() + " names unknown room " + std::to_string(r));
      if (seen[static_cast<std::size_t>(r)]++) throw Error("room " + std::to_string(r) + " is in two clusters");
    }
  }
  for (int r = 0; r < room_count; ++r) {
    if (!seen[static_cast<std::size_t>(r)]) {
      clusters_.push_back({next_cluster_++, {r}, {{1.0}}, false});
    }
  }
  normalize();
}

const Cluster* Catalog::cluster(int id) const {
  auto it = std::find_if(clusters_.begin(), clusters_.end(), [id](const Cluster& c) { return c.id == id; });
  return it == clusters_.end() ? nullptr : &*it;
}

int Catalog::representative(int room) const { return group_of_.at(static_cast<std::size_t>(room)); }

std::vector<std::vector<int>> Catalog::groups() const {
  std::vector<std::vector<int>> out;
  std::vector<int> index(static_cast<std::size_t>(room_count_), -1);
  for (int r = 0; r < room_count_; ++r) {
    const int rep = group_of_[static_cast<std::size_t>(r)];
    if (index[static_cast<std::size_t>(rep)] < 0) {
      index[static_cast<std::size_t>(rep)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(index[static_cast<std::size_t>(rep)])].push_back(r);
  }
  return out;
}

void Catalog::normalize() {
  std::erase_if(clusters_, [](const Cluster& c) { return c.members.empty(); });
  for (auto& c : clusters_) std::sort(c.members.begin(), c.members.end());
  std::sort(clusters_.begin(), clusters_.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
}

void Catalog::merge_rooms(const std::vector<int>& rooms) {
  // Collapse groups.
  int rep = room_count_;
  std::set<int> old_reps;
  for (int r : rooms) old_reps.insert(group_of_[static_cast<std::size_t>(r)]);
  for (int g : old_reps) rep = std::min(rep, g);
  std::vector<int> members;
  for (int r = 0; r < room_count_; ++r) {
    int& g = group_of_[static_cast<std::size_t>(r)];
    if (old_reps.count(g)) {
      g = rep;
      members.push_back(r);
    }
  }
  // The merged group lives in the cluster of its lowest room.
  Cluster* home = nullptr;
  for (auto& c : clusters_) {
    if (std::find(c.members.begin(), c.members.end(), rep) != c.members.end()) home = &c;
  }
  for (auto& c : clusters_) {
    if (&c == home) continue;
    std::erase_if(c.members, [&](int r) { return std::find(members.begin(), members.end(), r) != members.end(); });
  }
  for (int r : members) {
    if (std::find(home->members.begin(), home->members.end(), r) == home->members.end()) home->members.push_back(r);
  }
  home->similarity.clear();
  normalize();
}

void Catalog::apply(const Decision& d) {
  const std::string entry = format_decision(d, false);
  auto check_room = [&](int r) {
    if (r < 0 || r >= room_count_) throw DecisionError(entry, "room " + std::to_string(r) + " does not exist");
  };
  auto check_distinct = [&](const std::vector<int>& rooms) {
    std::set<int> s(rooms.begin(), rooms.end());
    if (s.size() != rooms.size()) throw DecisionError(entry, "a room is named twice");
  };

  switch (d.kind) {
    case Decision::Kind::Merge: {
      if (d.rooms.size() < 2) throw DecisionError(entry, "merge needs at least two rooms");
      for (int r : d.rooms) check_room(r);
      check_distinct(d.rooms);
      merge_rooms(d.rooms);
      break;
    }
    case Decision::Kind::Confirm: {
      const Cluster* c = cluster(d.cluster);
      if (!c) throw DecisionError(entry, "cluster C" + std::to_string(d.cluster) + " does not exist");
      if (c->members.size() > 1) merge_rooms(c->members);
      break;
    }
    case Decision::Kind::Split: {
      const Cluster* c = cluster(d.cluster);
      if (!c) throw DecisionError(entry, "cluster C" + std::to_string(d.cluster) + " does not exist");
      if (d.rooms.empty()) throw DecisionError(entry, "split needs at least one room");
      for (int r : d.rooms) check_room(r);
      check_distinct(d.rooms);
      for (int r : d.rooms) {
        if (std::find(c->members.begin(), c->members.end(), r) == c->members.end()) {
          throw DecisionError(entry, "room " + std::to_string(r) + " is not in " + c->name());
        }
        for (int other = 0; other < room_count_; ++other) {
          if (group_of_[static_cast<std::size_t>(other)] == group_of_[static_cast<std::size_t>(r)] &&
              std::find(d.rooms.begin(), d.rooms.end(), other) == d.rooms.end()) {
            throw DecisionError(entry, "room " + std::to_string(r) + " is merged with room " + std::to_string(other) +
                                           ", which the split leaves behind");
          }
        }
      }
      const int cid = d.cluster;
      auto it = std::find_if(clusters_.begin(), clusters_.end(), [cid](const Cluster& x) { return x.id == cid; });
      std::erase_if(it->members, [&](int r) { return std::find(d.rooms.begin(), d.rooms.end(), r) != d.rooms.end(); });
      it->similarity.clear();
      it->suggested = false;
      clusters_.push_back({next_cluster_++, d.rooms, {}, false});
      normalize();
      break;
    }
  }
  log_.push_back(d);
}

void Catalog::apply(std::span<const Decision> log) {
  for (const auto& d : log) apply(d);
}

MergedGraph merged_graph(const rooms::RoomGraph& graph, const Catalog& catalog,
                         std::span<const tiles::NormalizedRoom> rooms) {
  MergedGraph out;
  for (const auto& g : catalog.groups()) {
    MergedNode node{g.front(), g, 0, 0};
    for (const auto& r : rooms) {
      if (r.id == node.id) {
        node.width = r.width;
        node.height = r.height;
      }
    }
    out.nodes.push_back(std::move(node));
  }
  for (auto link : graph.links) {
    link.from_room = catalog.representative(link.from_room);
    link.to_room = catalog.representative(link.to_room);
    out.links.push_back(link);
  }
  return out;
}

}  // namespace automap::merge
