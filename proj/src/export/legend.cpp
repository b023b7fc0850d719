#include "json.hpp"

#include "automap/export/export.hpp"

namespace automap::exporter {

namespace {

std::string utf8(char32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xF0 | (cp >> 18));
    s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

}  // namespace

std::string Legend::glyph(std::size_t n) {
  if (n < kLegendPalette.size()) return std::string(1, kLegendPalette[n]);
  char32_t cp = 0x100 + static_cast<char32_t>(n - kLegendPalette.size());
  if (cp >= 0xD800) cp += 0x800;  // skip UTF-16 surrogates
  return utf8(cp);
}

const std::string& Legend::assign(const TileKey& key) {
  auto it = by_key_.find(key);
  if (it != by_key_.end()) return order_[it->second].first;
  const std::size_t n = order_.size();
  order_.emplace_back(glyph(n), key);
  by_key_.emplace(key, n);
  by_symbol_.emplace(order_.back().first, n);
  return order_.back().first;
}

const std::string& Legend::symbol(const TileKey& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) throw Error("tile key " + to_string(key) + " has no legend character");
  return order_[it->second].first;
}

std::optional<TileKey> Legend::key(std::string_view symbol) const {
  auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) return std::nullopt;
  return order_[it->second].second;
}

void Legend::assign_grids(std::span<const tiles::NormalizedRoom> rooms, tiles::Representative rule) {
  for (const auto& room : rooms) {
    for (const auto& cell : room.representative_grid(rule)) {
      if (cell) assign(*cell);
    }
  }
}

void Legend::assign_rest(std::span<const tiles::NormalizedRoom> rooms) {
  for (const auto& room : rooms) {
    for (const auto& h : room.cells) {
      for (const auto& iv : h) assign(iv.key);
    }
    for (const auto& p : room.placements) {
      for (const auto& c : p.layout) assign(c.key);
    }
  }
}

std::string legend_json(const Legend& legend) {
  nlohmann::ordered_json tiles = nlohmann::ordered_json::object();
  for (const auto& [ch, k] : legend.entries()) {
    tiles[ch] = {{"pattern", k.pattern}, {"palette", k.palette}, {"bank", k.bank}, {"aux", k.aux}};
  }
  nlohmann::ordered_json doc;
  doc["tiles"] = std::move(tiles);
  doc["unobserved"] = std::string(kUnobserved);
  return doc.dump(2) + "\n";
}

Legend parse_legend_json(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("legend is not valid JSON: ") + e.what());
  }
  Legend legend;
  if (!doc.contains("tiles") || !doc["tiles"].is_object()) throw Error("legend has no 'tiles' object");
  std::size_t n = 0;
  for (const auto& [ch, v] : doc["tiles"].items()) {
    TileKey k;
    try {
      k.pattern = v.at("pattern").get<std::uint8_t>();
      k.palette = v.at("palette").get<std::uint8_t>();
      k.bank = v.at("bank").get<std::uint16_t>();
      k.aux = v.value("aux", std::uint32_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw Error("legend entry '" + ch + "' is malformed: " + e.what());
    }
    if (ch != Legend::glyph(n)) throw Error("legend character '" + ch + "' is out of assignment order");
    legend.assign(k);
    ++n;
  }
  return legend;
}

}  // namespace automap::exporter
