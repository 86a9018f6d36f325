// Copyright 2026 The plotbot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plotbot/api/service.hpp"

#include <charconv>

#include <fmt/format.h>

namespace plotbot::api {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidCredentials:
    case ErrorCode::kUnauthenticated:
      return 401;
    case ErrorCode::kForbidden:
    case ErrorCode::kCrossPlotTarget:
      return 403;
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownTask:
    case ErrorCode::kUnknownPlant:
    case ErrorCode::kUnknownPlot:
    case ErrorCode::kUnknownUser:
    case ErrorCode::kNoFrames:
      return 404;
    case ErrorCode::kTaskRejected:
    case ErrorCode::kDuplicateWithinDebounce:
    case ErrorCode::kNotCancellable:
    case ErrorCode::kPlacementExhausted:
    case ErrorCode::kRobotBusy:
    case ErrorCode::kQueueEmpty:
      return 409;
    case ErrorCode::kCursorExpired:
      return 410;
    case ErrorCode::kMessageTooLong:
      return 413;
    case ErrorCode::kRateLimited:
      return 429;
    case ErrorCode::kQueueFull:
    case ErrorCode::kWeatherUnavailable:
    case ErrorCode::kSlowConsumer:
      return 503;
    case ErrorCode::kBadRequest:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownSpecies:
    case ErrorCode::kEmptyTargetList:
    case ErrorCode::kMalformedSequence:
    case ErrorCode::kOutOfBounds:
    case ErrorCode::kScriptInvalid:
    case ErrorCode::kInvalidWeatherTrace:
      return 400;
    default:
      return 500;
  }
}

Response error_response(const Error& e) {
  return {http_status(e.code()),
          {{"error",
            {{"code", static_cast<int>(e.code())},
             {"name", error_name(e.code())},
             {"message", e.what()},
             {"details", e.details()}}}}};
}

namespace {

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto j = path.find('/', i);
    const auto seg = path.substr(i, j == std::string::npos ? std::string::npos : j - i);
    if (!seg.empty()) out.push_back(seg);
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

std::int64_t to_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::kBadRequest, fmt::format("{} must be an integer, got '{}'", what, s));
  return v;
}

std::optional<std::string> param(const Request& r, const std::string& key) {
  const auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

json body_of(const Request& r) {
  if (r.body.empty()) return json::object();
  try {
    auto j = json::parse(r.body);
    if (!j.is_object()) throw Error(ErrorCode::kBadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kBadRequest, fmt::format("malformed JSON body: {}", e.what()));
  }
}

template <class T>
T field_of(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kBadRequest, fmt::format("missing field '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kBadRequest, fmt::format("field '{}' has the wrong type", key));
  }
}

Response ok(json body, int status = 200) { return {status, std::move(body)}; }

Response ppm(std::string bytes) {
  Response r;
  r.raw = std::move(bytes);
  r.content_type = "image/x-portable-pixmap";
  return r;
}

}  // namespace

ApiService::ApiService(garden::Garden& garden, StreamHub& hub, std::shared_ptr<sched::WeatherService> weather,
                       ApiConfig config, WallClock wall)
    : garden_(garden),
      hub_(hub),
      weather_(std::move(weather)),
      config_(config),
      sessions_(config.session_ttl, wall),
      limiter_(config.login_max_failures, config.login_window, wall) {}

Response ApiService::handle(const Request& req) {
  try {
    return route(req);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::kBadRequest, e.what()));
  } catch (const std::exception& e) {
    return {500, {{"error", {{"code", 500}, {"name", "Internal"}, {"message", e.what()}, {"details", json::object()}}}}};
  }
}

std::string ApiService::authenticate(const std::string& token) {
  try {
    return sessions_.check(token).user_id;
  } catch (const Error& e) {
    if (e.details().contains("expired_user_id")) {
      garden_.record_logout(e.details().at("expired_user_id").get<std::string>(), "expired");
      throw Error(ErrorCode::kUnauthenticated, "session expired");
    }
    throw;
  }
}

Response ApiService::route(const Request& req) {
  const auto seg = segments(req.path);
  if (seg.size() < 2 || seg[0] != "api" || seg[1] != "v1") throw Error(ErrorCode::kNotFound, "no such endpoint");
  const std::vector<std::string> s(seg.begin() + 2, seg.end());
  const auto& m = req.method;
  const auto is = [&](const char* method, std::initializer_list<const char*> path) {
    if (m != method || s.size() != path.size()) return false;
    std::size_t i = 0;
    for (const char* p : path) {
      if (std::string_view(p) != "*" && s[i] != p) return false;
      ++i;
    }
    return true;
  };

  if (is("GET", {"health"})) return ok({{"status", "ok"}, {"log_seq", garden_.log_seq()}, {"stream_seq", hub_.last_seq()}});
  if (is("POST", {"login"})) return login(req);

  const auto user = authenticate(req.token);
  if (is("POST", {"logout"})) return logout(req, user);
  if (is("GET", {"field"})) return field_view(req, user);
  if (is("GET", {"field", "render"})) return render(req);
  if (is("POST", {"tasks"})) return submit(req, user);
  if (is("GET", {"tasks", "*"})) return task(to_int(s[1], "task id"));
  if (is("DELETE", {"tasks", "*"})) return cancel(to_int(s[1], "task id"), user);
  if (is("GET", {"queue"})) return queue();
  if (is("GET", {"timeline"})) return timeline(req);
  if (is("GET", {"timelapse"})) return timelapse(req);
  if (is("GET", {"timelapse", "*"})) return timelapse_frame(req, static_cast<std::size_t>(to_int(s[1], "frame index")));
  if (is("GET", {"chat"})) return chat_history(req);
  if (is("POST", {"chat"})) return chat_post(req, user);
  if (is("GET", {"weather"})) return weather();
  if (is("GET", {"mode"})) return mode_get(user);
  if (is("PUT", {"mode"})) return mode_put(req, user);
  if (is("POST", {"feedback"})) return feedback(req, user);
  if (is("DELETE", {"plants", "*"})) return remove_plant(to_int(s[1], "plant id"), user);
  if (is("GET", {"users"})) return users();
  if (is("GET", {"gantry"}))
    return ok(garden_.read([](const garden::GardenState& st) { return json(st.gantry); }));
  if (is("GET", {"state"})) return state();
  throw Error(ErrorCode::kNotFound, fmt::format("no endpoint {} {}", m, req.path));
}

Response ApiService::login(const Request& req) {
  const auto body = body_of(req);
  const auto user_id = field_of<std::string>(body, "user_id");
  const auto password = field_of<std::string>(body, "password");
  limiter_.check(user_id);
  const auto hash = garden_.read([&](const garden::GardenState& st) {
    const auto* u = st.user(user_id);
    return u ? u->credential_hash : std::string();
  });
  if (!verify_password(hash, password)) {
    limiter_.failed(user_id);
    throw Error(ErrorCode::kInvalidCredentials, "unknown user or wrong password");
  }
  limiter_.succeeded(user_id);
  const auto session = sessions_.create(user_id);
  garden_.record_login(user_id);
  const auto plot = garden_.read([&](const garden::GardenState& st) { return *st.plot_of(user_id); });
  return ok({{"token", session.token},
             {"user_id", user_id},
             {"plot_id", plot},
             {"expires_in_s", config_.session_ttl.count()}});
}

Response ApiService::logout(const Request& req, const std::string& user) {
  sessions_.revoke(req.token);
  garden_.record_logout(user, "logout");
  return ok({{"ok", true}});
}

Response ApiService::field_view(const Request& req, const std::string& user) {
  const auto scope = param(req, "scope").value_or("global");
  const auto style = field::style_from_string(param(req, "style").value_or("abstract"));
  if (scope != "global" && scope != "plot") throw Error(ErrorCode::kBadRequest, "scope must be global or plot");
  return garden_.read([&](const garden::GardenState& st) {
    std::optional<int> plot;
    if (scope == "plot") {
      const auto p = param(req, "plot");
      plot = p ? static_cast<int>(to_int(*p, "plot")) : *st.plot_of(user);
      st.field.plot(*plot);
    }
    auto frame = field::capture_frame(st.field, st.day, st.now);
    if (plot) frame = field::crop(frame, st.field.plot(*plot));

    json plots = json::array();
    for (const auto& p : st.field.plots) {
      if (plot && p.id != *plot) continue;
      json owner = nullptr;
      for (const auto& [id, u] : st.users)
        if (u.plot_id == p.id) owner = id;
      plots.push_back({{"id", p.id}, {"origin", p.origin}, {"size_mm", p.size_mm}, {"owner", owner}});
    }
    json plants = json::array();
    for (const auto& [id, p] : st.field.plants)
      if (p.live() && (!plot || p.plot_id == *plot)) plants.push_back(garden::plant_view(p));
    json weeds = json::array();
    for (const auto& [id, w] : st.field.weeds)
      if (!plot || w.plot_id == *plot) weeds.push_back(garden::weed_view(w));

    std::string href = fmt::format("/api/v1/field/render?perspective=topdown&style={}", field::to_string(style));
    if (plot) href += fmt::format("&plot={}", *plot);
    return ok({{"scope", scope},
               {"plot_id", plot ? json(*plot) : json(nullptr)},
               {"day", st.day},
               {"plots", plots},
               {"plants", plants},
               {"weeds", weeds},
               {"moisture",
                {{"origin", frame.origin},
                 {"cell_mm", frame.cell_mm},
                 {"cols", frame.cols},
                 {"rows", frame.rows},
                 {"values", frame.moisture}}},
               {"snapshot", {{"style", field::to_string(style)}, {"href", href}}}});
  });
}

Response ApiService::render(const Request& req) {
  const auto perspective = field::perspective_from_string(param(req, "perspective").value_or("topdown"));
  const auto style = field::style_from_string(param(req, "style").value_or("abstract"));
  const int mm_per_px =
      static_cast<int>(param(req, "mm_per_px") ? to_int(*param(req, "mm_per_px"), "mm_per_px") : config_.render_mm_per_px);
  if (mm_per_px < 1 || mm_per_px > 1000) throw Error(ErrorCode::kBadRequest, "mm_per_px must be in 1..1000");
  auto frame = garden_.read([&](const garden::GardenState& st) {
    auto f = field::capture_frame(st.field, st.day, st.now, perspective, st.gantry.position);
    if (const auto p = param(req, "plot")) f = field::crop(f, st.field.plot(static_cast<int>(to_int(*p, "plot"))));
    return f;
  });
  return ppm(field::encode_ppm(field::render(frame, style, mm_per_px)));
}

Response ApiService::submit(const Request& req, const std::string& user) {
  const auto body = body_of(req);
  tasks::TaskKind kind;
  try {
    kind = body.get<tasks::TaskKind>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRequest, fmt::format("malformed task: {}", e.what()));
  }
  const auto r = garden_.submit(user, std::move(kind));
  return ok({{"task", r.task},
             {"position", r.position},
             {"estimate_s", r.estimate_s},
             {"enqueued_at", format_iso8601(r.enqueued_at)},
             {"validation", r.validation}},
            201);
}

Response ApiService::task(tasks::TaskId id) {
  return garden_.read([&](const garden::GardenState& st) {
    if (!st.queue.contains(id)) throw Error(ErrorCode::kUnknownTask, fmt::format("no task {}", id));
    return ok(json(st.queue.entry(id)));
  });
}

Response ApiService::cancel(tasks::TaskId id, const std::string& user) {
  garden_.cancel(user, id);
  return task(id);
}

Response ApiService::queue() {
  const double remaining = garden_.executing_remaining_s();
  return garden_.read([&](const garden::GardenState& st) {
    return ok({{"entries", st.queue.snapshot(remaining)}, {"pending", st.queue.pending_count()}});
  });
}

Response ApiService::timeline(const Request& req) {
  field::TimelineFilter f;
  f.actor = param(req, "actor");
  if (const auto p = param(req, "plot")) f.plot_id = static_cast<int>(to_int(*p, "plot"));
  if (const auto k = param(req, "kind")) {
    f.kind = field::event_kind_from_string(*k);
    if (!f.kind) throw Error(ErrorCode::kBadRequest, fmt::format("unknown event kind '{}'", *k));
  }
  try {
    if (const auto t = param(req, "from")) f.from = parse_iso8601(*t);
    if (const auto t = param(req, "to")) f.to = parse_iso8601(*t);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBadRequest, e.what());
  }
  if (const auto a = param(req, "after")) f.after_id = to_int(*a, "after");
  if (const auto l = param(req, "limit")) {
    const auto n = to_int(*l, "limit");
    if (n < 1 || n > 1000) throw Error(ErrorCode::kBadRequest, "limit must be in 1..1000");
    f.limit = static_cast<std::size_t>(n);
  }
  return garden_.read([&](const garden::GardenState& st) {
    const auto page = st.timeline.query(f);
    return ok({{"events", page.events}, {"next_after", page.next_after ? json(*page.next_after) : json(nullptr)}});
  });
}

Response ApiService::timelapse(const Request& req) {
  return garden_.read([&](const garden::GardenState& st) {
    std::optional<field::Plot> plot;
    if (const auto p = param(req, "plot")) plot = st.field.plot(static_cast<int>(to_int(*p, "plot")));
    const auto frames = field::assemble_timelapse(st.frames, plot);
    json out = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::string href = fmt::format("/api/v1/timelapse/{}", i);
      if (plot) href += fmt::format("?plot={}", plot->id);
      out.push_back({{"index", i},
                     {"day_index", frames[i].day_index},
                     {"captured_at", format_iso8601(frames[i].captured_at)},
                     {"href", href}});
    }
    return ok({{"plot_id", plot ? json(plot->id) : json(nullptr)}, {"frames", out}});
  });
}

Response ApiService::timelapse_frame(const Request& req, std::size_t index) {
  const auto style = field::style_from_string(param(req, "style").value_or("abstract"));
  auto frame = garden_.read([&](const garden::GardenState& st) {
    std::optional<field::Plot> plot;
    if (const auto p = param(req, "plot")) plot = st.field.plot(static_cast<int>(to_int(*p, "plot")));
    auto frames = field::assemble_timelapse(st.frames, plot);
    if (index >= frames.size()) throw Error(ErrorCode::kNotFound, fmt::format("no frame {}", index));
    return frames[index];
  });
  return ppm(field::encode_ppm(field::render(frame, style, config_.render_mm_per_px)));
}

Response ApiService::chat_history(const Request& req) {
  const std::int64_t after = param(req, "after") ? to_int(*param(req, "after"), "after") : 0;
  const auto limit = param(req, "limit") ? to_int(*param(req, "limit"), "limit") : 100;
  if (limit < 1 || limit > 1000) throw Error(ErrorCode::kBadRequest, "limit must be in 1..1000");
  return garden_.read([&](const garden::GardenState& st) {
    json msgs = json::array();
    json next = nullptr;
    for (const auto& m : st.chat) {
      if (m.id <= after) continue;
      if (static_cast<std::int64_t>(msgs.size()) == limit) {
        next = msgs.back().at("id");
        break;
      }
      msgs.push_back(m);
    }
    return ok({{"messages", msgs}, {"next_after", next}});
  });
}

Response ApiService::chat_post(const Request& req, const std::string& user) {
  const auto m = garden_.post_chat(user, field_of<std::string>(body_of(req), "text"));
  return ok(json(m), 201);
}

Response ApiService::weather() {
  if (!weather_) throw Error(ErrorCode::kWeatherUnavailable, "no weather provider configured");
  const auto now = garden_.clock().now();
  return ok(json(weather_->read(now, config_.weather_window)));
}

Response ApiService::mode_get(const std::string& user) {
  return garden_.read([&](const garden::GardenState& st) {
    json changes = json::array();
    for (const auto& c : st.modes.log()) {
      if (c.user_id != user) continue;
      changes.push_back({{"at", format_iso8601(c.at)},
                         {"old", policy::to_string(c.old_mode)},
                         {"new", policy::to_string(c.new_mode)}});
    }
    return ok({{"user_id", user}, {"mode", policy::to_string(st.modes.mode_of(user))}, {"changes", changes}});
  });
}

Response ApiService::mode_put(const Request& req, const std::string& user) {
  const auto name = field_of<std::string>(body_of(req), "mode");
  const auto mode = policy::mode_from_string(name);
  if (!mode) throw Error(ErrorCode::kBadRequest, fmt::format("unknown mode '{}'", name));
  const auto change = garden_.switch_mode(user, *mode);
  return ok({{"user_id", user},
             {"old", policy::to_string(change.old_mode)},
             {"mode", policy::to_string(change.new_mode)},
             {"at", format_iso8601(change.at)}});
}

Response ApiService::feedback(const Request& req, const std::string& user) {
  const auto ev = garden_.post_feedback(user, field_of<std::string>(body_of(req), "text"));
  return ok(json(ev), 201);
}

Response ApiService::remove_plant(field::PlantId id, const std::string& user) {
  garden_.remove_plant(user, id);
  return ok({{"ok", true}, {"plant_id", id}});
}

Response ApiService::users() {
  return garden_.read([&](const garden::GardenState& st) {
    json out = json::array();
    for (const auto& [id, u] : st.users)
      out.push_back({{"user_id", id},
                     {"display_name", u.display_name},
                     {"plot_id", u.plot_id},
                     {"mode", policy::to_string(st.modes.mode_of(id))}});
    return ok({{"users", out}});
  });
}

Response ApiService::state() {
  return garden_.read([&](const garden::GardenState& st) { return ok(live_document(st, hub_.last_seq())); });
}

}  // namespace plotbot::api
