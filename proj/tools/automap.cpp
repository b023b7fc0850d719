// Command-line entry point: run | suggest | export | serve.

#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "automap/export/session.hpp"
#include "automap/movie/movie_io.hpp"
#include "automap/pipeline/pipeline.hpp"
#include "automap/service/service.hpp"
#include "automap/synthetic/synthetic_console.hpp"

namespace fs = std::filesystem;
using namespace automap;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

service::SessionService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

struct RunArgs {
  std::string core = "synthetic";
  std::string script;
  std::string movie;
  std::string window = "0,0,256,240";
  std::string out;
  std::string method = "nametable";
  std::string representative = "quarter";
  std::string exclusions;
  exporter::RunConfig config;
  bool no_probe = false;
};

exporter::RunConfig build_config(RunArgs& a) {
  exporter::RunConfig c = a.config;
  c.core = a.core;
  c.script = a.script;
  c.movie = a.movie;
  try {
    c.window = parse_window(a.window);
    c.method = scroll::parse_method(a.method);
    c.representative = tiles::parse_representative(a.representative);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  c.probe = !a.no_probe;
  if (!a.exclusions.empty()) {
    if (!fs::exists(a.exclusions)) throw UsageError("exclusions file not found: " + a.exclusions);
    c.exclusions = objects::parse_exclusions(exporter::read_file(a.exclusions));
  }
  return c;
}

int cmd_run(RunArgs& a) {
  if (a.core != "synthetic") throw UsageError("unsupported core '" + a.core + "' (available: synthetic)");
  if (!fs::exists(a.script)) throw UsageError("script not found: " + a.script);
  if (!fs::exists(a.movie)) throw UsageError("movie not found: " + a.movie);
  const exporter::RunConfig config = build_config(a);

  auto console = synthetic::SyntheticConsole::from_text(exporter::read_file(a.script));
  const movie::InputMovie movie = movie::load_movie(a.movie);
  for (const auto& w : movie.warnings) spdlog::warn("{}: {}", a.movie, w);

  pipeline::RunStats stats;
  exporter::Session session = pipeline::run(*console, movie, config, &stats);
  exporter::write_exports(session, a.out);
  spdlog::info("{} frames ({} observed) in {:.2f} s, {} rooms, {} links, {} tracks", stats.frames, stats.observed,
               stats.seconds, session.rooms.size(), session.graph.links.size(), session.tracks.size());
  std::cout << "wrote " << session.rooms.size() << " rooms to " << a.out << "\n";
  return kOk;
}

std::string require_session_dir(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / exporter::ExportLayout::session())) {
    throw UsageError("no " + exporter::ExportLayout::session() + " in " + dir);
  }
  return dir;
}

int cmd_suggest(const std::string& dir, std::optional<double> tau) {
  exporter::Session s = service::load_session(require_session_dir(dir));
  if (!s.decisions.empty()) {
    throw UsageError("session has " + std::to_string(s.decisions.size()) +
                     " recorded decisions; re-suggesting would invalidate their cluster ids");
  }
  exporter::resuggest(s, tau.value_or(s.config.tau));
  if (tau) s.config.tau = *tau;
  exporter::write_exports(s, dir);
  for (const auto& c : s.suggestions) {
    if (c.members.size() < 2) continue;
    std::cout << c.name() << ":";
    for (int m : c.members) std::cout << " " << m;
    std::cout << "\n";
  }
  return kOk;
}

int cmd_export(const std::string& dir) {
  const exporter::Session s = service::load_session(require_session_dir(dir));
  exporter::write_exports(s, dir);
  std::cout << "exported " << s.rooms.size() << " rooms to " << dir << "\n";
  return kOk;
}

int cmd_serve(const std::string& dir, const std::string& host, int port) {
  service::SessionService svc(require_session_dir(dir));
  g_service = &svc;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (!svc.listen(host, port)) {
    g_service = nullptr;
    spdlog::error("cannot listen on {}:{}", host, port);
    return kFailed;
  }
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  if (const char* level = std::getenv("AUTOMAP_LOG")) spdlog::cfg::helpers::load_levels(level);

  CLI::App app{"Map extraction from recorded console play"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Play a movie on a core and write the session and exports");
  run->add_option("--core", ra.core, "Console core")->capture_default_str();
  run->add_option("--script", ra.script, "World script for the synthetic core")->required();
  run->add_option("--movie", ra.movie, "Input movie (.fm2 or native)")->required();
  run->add_option("--window", ra.window, "Scroll window x,y,w,h")->capture_default_str();
  run->add_option("--frame-skip", ra.config.frame_skip, "Observe every Nth frame")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--out", ra.out, "Output directory")->required();
  run->add_option("--scroll-method", ra.method, "nametable or consecutive")->capture_default_str();
  run->add_option("--search-radius", ra.config.search_radius, "Consecutive registration radius in px")
      ->check(CLI::Range(1, 128))->capture_default_str();
  run->add_flag("--no-probe", ra.no_probe, "Skip the control probe (every frame counts as controlled)");
  run->add_option("--control-lookahead", ra.config.control_lookahead, "Frames each probe future runs")
      ->check(CLI::Range(1, 60))->capture_default_str();
  run->add_option("--control-stride", ra.config.control_stride, "Probe every Nth frame")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--loss-threshold", ra.config.loss_threshold, "Minimum loss-of-control run in frames")
      ->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--teleport-delta", ra.config.teleport_delta, "Window difference that signals a teleport")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  run->add_option("--refractory", ra.config.refractory, "Frames after a teleport before another may fire")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  run->add_option("--max-dist", ra.config.tracker.match.max_dist, "Tracker gating distance in px")
      ->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--alpha", ra.config.tracker.match.alpha, "Tracker distance weight")->capture_default_str();
  run->add_option("--beta", ra.config.tracker.match.beta, "Tracker layout weight")->capture_default_str();
  run->add_option("--coast", ra.config.tracker.coast, "Frames a track survives unmatched")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  run->add_option("--exclusions", ra.exclusions, "File of sprite signatures to exclude");
  run->add_option("--tau", ra.config.tau, "Merge suggestion threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  run->add_option("--representative", ra.representative, "quarter or mode")->capture_default_str();

  std::string dir;
  std::optional<double> tau;
  auto* suggest = app.add_subcommand("suggest", "Recompute merge suggestions");
  suggest->add_option("--session", dir, "Session directory")->required();
  suggest->add_option("--tau", tau, "Similarity threshold")->check(CLI::Range(0.0, 1.0));

  auto* exp = app.add_subcommand("export", "Regenerate exports from a session directory");
  exp->add_option("--session", dir, "Session directory")->required();

  std::string host = "127.0.0.1";
  int port = 8374;
  auto* serve = app.add_subcommand("serve", "Serve the session and decision API");
  serve->add_option("--session", dir, "Session directory")->required();
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535))->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*suggest) return cmd_suggest(dir, tau);
    if (*exp) return cmd_export(dir);
    if (*serve) return cmd_serve(dir, host, port);
  } catch (const UsageError& e) {
    std::cerr << "automap: " << e.what() << "\n";
    return kUsage;
  } catch (const pipeline::PipelineError& e) {
    std::cerr << "automap: pipeline failed at " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "automap: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
