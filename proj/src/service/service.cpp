#include "automap/service/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <mutex>

#include "httplib.h"
#include "json.hpp"

namespace automap::service {

namespace fs = std::filesystem;
using exporter::ExportLayout;
using exporter::Session;

namespace {

std::string join(const std::string& dir, const std::string& rel) { return (fs::path(dir) / rel).string(); }

Reply json_error(int status, const std::string& message, const std::string& entry = {}) {
  nlohmann::ordered_json doc;
  doc["error"] = message;
  if (!entry.empty()) doc["entry"] = entry;
  return {status, "application/json", doc.dump() + "\n"};
}

Reply png_reply(const exporter::Image& image) {
  const auto bytes = exporter::encode_png(image);
  return {200, "image/png", std::string(bytes.begin(), bytes.end())};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Authors go into a one-word log comment, so whitespace and `#` are replaced.
std::string sanitize_author(std::string_view author) {
  std::string out;
  for (char c : author) {
    const auto u = static_cast<unsigned char>(c);
    out += (std::isspace(u) || c == '#' || std::iscntrl(u)) ? '_' : c;
  }
  return out.empty() ? "anonymous" : out;
}

}  // namespace

Session load_session(const std::string& dir) {
  const std::string session_path = join(dir, ExportLayout::session());
  if (!fs::exists(session_path)) throw Error("no session at " + session_path);
  Session s = exporter::session_from_json(exporter::read_file(session_path));
  const std::string log_path = join(dir, ExportLayout::decisions());
  if (fs::exists(log_path)) s.decisions = merge::parse_decision_log(exporter::read_file(log_path));
  (void)s.catalog();  // throws DecisionError when the log does not apply
  return s;
}

void append_decisions(const std::string& path, const std::vector<merge::Decision>& decisions) {
  std::string text;
  for (const auto& d : decisions) text += merge::format_decision(d) + "\n";
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot open " + path + " for append");
  std::size_t done = 0;
  while (done < text.size()) {
    const ssize_t n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      ::close(fd);
      throw Error("write to " + path + " failed");
    }
    done += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw Error("fsync of " + path + " failed");
}

struct SessionService::Http {
  httplib::Server server;
};

SessionService::SessionService(std::string dir)
    : dir_(std::move(dir)), session_(load_session(dir_)), http_(std::make_unique<Http>()) {
  auto& srv = http_->server;
  auto send = [](httplib::Response& res, const Reply& r) { res.set_content(r.body, r.content_type); res.status = r.status; };

  srv.Get("/api/session", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_session()); });
  srv.Get(R"(/api/rooms/([^/]+)/image\.png)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_room_image(req.matches[1].str()));
  });
  srv.Get("/api/atlas.png", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_atlas()); });
  srv.Post("/api/decisions", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::string author = req.get_header_value("X-Author");
    if (author.empty() && req.has_param("author")) author = req.get_param_value("author");
    send(res, post_decisions(req.body, author));
  });
  srv.Post("/api/export", [this, send](const httplib::Request&, httplib::Response& res) { send(res, post_export()); });
  srv.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    }
    spdlog::error("{} {}: {}", req.method, req.path, what);
    const Reply r = json_error(500, what);
    res.set_content(r.body, r.content_type);
    res.status = 500;
  });
}

SessionService::~SessionService() { stop(); }

Reply SessionService::get_session() const {
  std::shared_lock lock(mu_);
  return {200, "application/json", exporter::session_to_json(session_)};
}

Reply SessionService::get_room_image(std::string_view id) const {
  int room = -1;
  const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), room);
  std::shared_lock lock(mu_);
  if (ec != std::errc{} || end != id.data() + id.size() || room < 0 ||
      room >= static_cast<int>(session_.rooms.size())) {
    return json_error(404, "unknown room '" + std::string(id) + "'");
  }
  const auto& r = session_.rooms[static_cast<std::size_t>(room)];
  return png_reply(exporter::rasterize(r, session_.patterns, session_.config.representative));
}

Reply SessionService::get_atlas() const {
  std::shared_lock lock(mu_);
  const merge::Catalog catalog = session_.catalog();
  return png_reply(exporter::atlas(session_.rooms, session_.graph, catalog.clusters(), session_.patterns,
                                   session_.config.representative));
}

Reply SessionService::post_decisions(std::string_view body, std::string_view author) {
  std::vector<merge::Decision> incoming;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t nl = body.find('\n', pos);
    std::string_view line = body.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? body.size() + 1 : nl + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || std::isspace(static_cast<unsigned char>(line.back())))) {
      line.remove_suffix(1);
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    try {
      incoming.push_back(merge::parse_decision(line));
    } catch (const Error& e) {
      return json_error(422, e.what(), std::string(line));
    }
  }
  if (incoming.empty()) return json_error(422, "no decisions in request body");

  const std::string who = sanitize_author(author);
  const std::string when = utc_timestamp();
  for (auto& d : incoming) {
    if (d.author.empty()) d.author = who;
    if (d.timestamp.empty()) d.timestamp = when;
  }

  std::unique_lock lock(mu_);
  merge::Catalog trial = session_.catalog();
  for (const auto& d : incoming) {
    try {
      trial.apply(d);
    } catch (const merge::DecisionError& e) {
      return json_error(422, e.what(), merge::format_decision(d, false));
    }
  }

  append_decisions(join(dir_, ExportLayout::decisions()), incoming);
  session_.decisions.insert(session_.decisions.end(), incoming.begin(), incoming.end());
  exporter::write_file_atomic(join(dir_, ExportLayout::session()), exporter::session_to_json(session_));
  spdlog::info("accepted {} decision(s) from {}", incoming.size(), who);
  return {200, "application/json", exporter::merged_json(session_)};
}

Reply SessionService::post_export() {
  std::unique_lock lock(mu_);
  exporter::write_exports(session_, dir_);
  nlohmann::ordered_json doc;
  doc["exported"] = dir_;
  doc["rooms"] = session_.rooms.size();
  return {200, "application/json", doc.dump() + "\n"};
}

bool SessionService::listen(const std::string& host, int port) {
  spdlog::info("serving {} on http://{}:{}", dir_, host, port);
  return http_->server.listen(host, port);
}

int SessionService::bind_any(const std::string& host) { return http_->server.bind_to_any_port(host); }

bool SessionService::listen_bound() { return http_->server.listen_after_bind(); }

void SessionService::stop() {
  if (http_) http_->server.stop();
}

}  // namespace automap::service
