#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "automap/export/session.hpp"

namespace automap::service {

/// Loads `dir/session.json` and replays `dir/decisions.log` over it when the
/// log exists. Throws `Error` if either is unusable.
exporter::Session load_session(const std::string& dir);

/// Appends `decisions` to the log file and forces them to disk.
void append_decisions(const std::string& path, const std::vector<merge::Decision>& decisions);

/// Outcome of an API call, independent of the HTTP transport.
struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// The session and decision API. Reads run concurrently; decision writes are
/// serialized and reach the decision log before they are acknowledged.
class SessionService {
 public:
  explicit SessionService(std::string dir);

  Reply get_session() const;
  Reply get_room_image(std::string_view id) const;
  Reply get_atlas() const;
  /// Body: decision log lines. `author` is recorded with each entry.
  Reply post_decisions(std::string_view body, std::string_view author);
  Reply post_export();

  /// Blocks serving HTTP until `stop` is called. Returns false if the port
  /// could not be bound.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it, or -1; then call `listen_bound`.
  int bind_any(const std::string& host);
  bool listen_bound();
  void stop();

  const std::string& dir() const { return dir_; }
  ~SessionService();

 private:
  struct Http;

  std::string dir_;
  mutable std::shared_mutex mu_;
  exporter::Session session_;
  std::unique_ptr<Http> http_;
};

}  // namespace automap::service
