#include <charconv>
#include <sstream>

#include "automap/merge/merge_engine.hpp"

namespace automap::merge {

namespace {

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size() && out >= 0;
}

int parse_cluster(std::string_view s) {
  int id = -1;
  if (s.size() < 2 || (s[0] != 'C' && s[0] != 'c') || !parse_int(s.substr(1), id)) {
    throw Error("expected a cluster id like C0, got '" + std::string(s) + "'");
  }
  return id;
}

int parse_room(std::string_view s) {
  int id = -1;
  if (!parse_int(s, id)) throw Error("expected a room id, got '" + std::string(s) + "'");
  return id;
}

}  // namespace

Decision parse_decision(std::string_view line) {
  std::string_view body = line;
  std::string_view comment;
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    body = line.substr(0, hash);
    comment = line.substr(hash + 1);
  }
  std::istringstream in{std::string(body)};
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) throw Error("empty decision");

  Decision d;
  const std::string& verb = words.front();
  if (verb == "merge") {
    d.kind = Decision::Kind::Merge;
    for (std::size_t i = 1; i < words.size(); ++i) d.rooms.push_back(parse_room(words[i]));
    if (d.rooms.size() < 2) throw Error("merge needs at least two rooms");
  } else if (verb == "split") {
    d.kind = Decision::Kind::Split;
    if (words.size() < 3) throw Error("split needs a cluster and at least one room");
    d.cluster = parse_cluster(words[1]);
    for (std::size_t i = 2; i < words.size(); ++i) d.rooms.push_back(parse_room(words[i]));
  } else if (verb == "confirm") {
    d.kind = Decision::Kind::Confirm;
    if (words.size() != 2) throw Error("confirm takes exactly one cluster");
    d.cluster = parse_cluster(words[1]);
  } else {
    throw Error("unknown decision '" + verb + "' (expected merge, split or confirm)");
  }

  std::istringstream cin{std::string(comment)};
  for (std::string w; cin >> w;) {
    if (w.rfind("author=", 0) == 0) {
      d.author = w.substr(7);
    } else if (d.timestamp.empty()) {
      d.timestamp = w;
    }
  }
  return d;
}

std::string format_decision(const Decision& d, bool with_attribution) {
  std::string s;
  switch (d.kind) {
    case Decision::Kind::Merge: s = "merge"; break;
    case Decision::Kind::Split: s = "split C" + std::to_string(d.cluster); break;
    case Decision::Kind::Confirm: s = "confirm C" + std::to_string(d.cluster); break;
  }
  for (int r : d.rooms) s += " " + std::to_string(r);
  if (with_attribution && (!d.author.empty() || !d.timestamp.empty())) {
    s += " #";
    if (!d.author.empty()) s += " author=" + d.author;
    if (!d.timestamp.empty()) s += " " + d.timestamp;
  }
  return s;
}

std::vector<Decision> parse_decision_log(std::string_view text) {
  std::vector<Decision> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.back() == '\r') line.pop_back();
    try {
      out.push_back(parse_decision(line));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::string format_decision_log(std::span<const Decision> log) {
  std::string out;
  for (const auto& d : log) out += format_decision(d) + "\n";
  return out;
}

}  // namespace automap::merge
