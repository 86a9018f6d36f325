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

#include <doctest.h>

#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "plotbot/api/http_server.hpp"
#include "plotbot/api/service.hpp"

using namespace plotbot;
using namespace plotbot::api;
using nlohmann::json;
using policy::ControlMode;

namespace {

struct FakeWall {
  std::chrono::steady_clock::time_point t{};
  WallClock fn() {
    return [this] { return t; };
  }
};

struct Fixture {
  FakeWall wall;
  garden::Garden garden{garden::GardenConfig{}, std::make_unique<field::EventLog>()};
  StreamHub hub{1 << 16, 1 << 14};
  std::shared_ptr<sched::StubExternalWeather> provider = std::make_shared<sched::StubExternalWeather>(3);
  ApiService api;

  explicit Fixture(ApiConfig cfg = {})
      : api(garden, hub, std::make_shared<sched::WeatherService>(provider), cfg, wall.fn()) {
    garden.attach_sink(&hub);
    const auto hash = hash_password("pw", HashCost::minimum());
    garden.register_user("ana", "Ana", 0, hash, ControlMode::manual);
    garden.register_user("bo", "Bo", 1, hash, ControlMode::hybrid);
    garden.register_user("cy", "Cy", 2, hash, ControlMode::automated);
  }

  Response call(const std::string& method, const std::string& path, const std::string& token = "",
                json body = nullptr, std::map<std::string, std::string> query = {}) {
    Request r{method, path, std::move(query), token, body.is_null() ? "" : body.dump()};
    return api.handle(r);
  }

  std::string login(const std::string& user) {
    const auto r = call("POST", "/api/v1/login", "", {{"user_id", user}, {"password", "pw"}});
    REQUIRE(r.status == 200);
    return r.body.at("token").get<std::string>();
  }
};

int error_code(const Response& r) { return r.body.at("error").at("code").get<int>(); }

}  // namespace

TEST_CASE("login with a wrong password yields InvalidCredentials and no session") {
  Fixture f;
  const auto r = f.call("POST", "/api/v1/login", "", {{"user_id", "ana"}, {"password", "nope"}});
  CHECK(r.status == 401);
  CHECK(error_code(r) == 600);
  CHECK(f.api.sessions().active() == 0);
  const auto unknown = f.call("POST", "/api/v1/login", "", {{"user_id", "zed"}, {"password", "pw"}});
  CHECK(error_code(unknown) == 600);
}

TEST_CASE("repeated failed logins are rate limited") {
  Fixture f;
  for (int i = 0; i < 5; ++i) f.call("POST", "/api/v1/login", "", {{"user_id", "ana"}, {"password", "x"}});
  const auto r = f.call("POST", "/api/v1/login", "", {{"user_id", "ana"}, {"password", "pw"}});
  CHECK(r.status == 429);
  CHECK(error_code(r) == 601);
  f.wall.t += std::chrono::seconds(61);
  CHECK(f.call("POST", "/api/v1/login", "", {{"user_id", "ana"}, {"password", "pw"}}).status == 200);
}

TEST_CASE("expired session is rejected and logged out") {
  ApiConfig cfg;
  cfg.session_ttl = std::chrono::seconds(60);
  Fixture f(cfg);
  const auto tok = f.login("ana");
  CHECK(f.call("GET", "/api/v1/queue", tok).status == 200);
  f.wall.t += std::chrono::seconds(60);
  const auto r = f.call("GET", "/api/v1/queue", tok);
  CHECK(r.status == 401);
  CHECK(error_code(r) == 602);
  const auto kinds = f.garden.read([](const auto& s) {
    std::vector<field::EventKind> k;
    for (const auto& e : s.timeline.events()) k.push_back(e.kind);
    return k;
  });
  REQUIRE(kinds.size() == 2);
  CHECK(kinds[0] == field::EventKind::login);
  CHECK(kinds[1] == field::EventKind::logout);
  CHECK(f.call("GET", "/api/v1/queue").status == 401);
}

TEST_CASE("fresh field view shows 18 plots and no plants") {
  Fixture f;
  const auto tok = f.login("ana");
  const auto r = f.call("GET", "/api/v1/field", tok);
  REQUIRE(r.status == 200);
  CHECK(r.body.at("plots").size() == 18);
  CHECK(r.body.at("plants").empty());
  CHECK(f.call("GET", "/api/v1/field", tok, nullptr, {{"scope", "plot"}, {"plot", "99"}}).status == 404);
}

TEST_CASE("plot-scoped views partition the global plant set") {
  Fixture f;
  const auto a = f.login("ana");
  const auto b = f.login("bo");
  f.call("POST", "/api/v1/tasks", a, {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({200, 200})}});
  f.call("POST", "/api/v1/tasks", a, {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({500, 500})}});
  f.call("POST", "/api/v1/tasks", b, {{"kind", "sow"}, {"species", "lettuce"}, {"target", nullptr}});
  f.garden.run_until(f.garden.clock().now() + std::chrono::hours(1));
  const auto global = f.call("GET", "/api/v1/field", a).body.at("plants");
  CHECK(global.size() == 3);
  std::set<std::int64_t> ids;
  for (int p = 0; p < 18; ++p) {
    const auto part = f.call("GET", "/api/v1/field", a, nullptr, {{"scope", "plot"}, {"plot", std::to_string(p)}});
    for (const auto& pl : part.body.at("plants")) {
      CHECK(pl.at("plot_id") == p);
      CHECK(ids.insert(pl.at("id").get<std::int64_t>()).second);
    }
  }
  CHECK(ids.size() == global.size());

  auto photo = f.call("GET", "/api/v1/field", a, nullptr, {{"style", "photo_grid"}}).body;
  auto abstract = f.call("GET", "/api/v1/field", a).body;
  CHECK(photo.at("snapshot") != abstract.at("snapshot"));
  photo.erase("snapshot");
  abstract.erase("snapshot");
  CHECK(photo == abstract);
}

TEST_CASE("hybrid spacing violation is rejected with R1 while manual only warns") {
  Fixture f;
  const auto a = f.login("ana");
  const auto b = f.login("bo");
  const auto sow = [&](const std::string& tok, int x, int y) {
    return f.call("POST", "/api/v1/tasks", tok,
                  {{"kind", "sow"}, {"species", "lettuce"}, {"target", json::array({x, y})}});
  };
  CHECK(sow(b, 1300, 300).status == 201);
  const auto rej = sow(b, 1350, 300);
  CHECK(rej.status == 409);
  CHECK(error_code(rej) == 410);
  CHECK(rej.body.at("error").at("details").at("validation").at("findings").at(0).at("rule_id") == "R1");

  CHECK(sow(a, 300, 300).status == 201);
  const auto warn = sow(a, 350, 300);
  CHECK(warn.status == 201);
  CHECK(warn.body.at("validation").at("verdict") == "warnings");
  CHECK(warn.body.at("validation").at("findings").at(0).at("rule_id") == "R1");
}

TEST_CASE("read your writes on the queue") {
  Fixture f;
  const auto a = f.login("ana");
  const auto r = f.call("POST", "/api/v1/tasks", a, {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({400, 400})}});
  const auto id = r.body.at("task").at("id");
  const auto q = f.call("GET", "/api/v1/queue", a).body.at("entries");
  REQUIRE(q.size() == 1);
  CHECK(q.at(0).at("task_id") == id);
  CHECK(f.call("GET", "/api/v1/tasks/" + id.dump(), a).body.at("state") == "pending");
}

TEST_CASE("burst of submissions from three sessions gets increasing positions in arrival order") {
  Fixture f;
  const std::vector<std::string> toks{f.login("ana"), f.login("bo"), f.login("cy")};
  std::mutex mu;
  std::vector<std::pair<std::int64_t, int>> seen;  // task id, position
  std::vector<std::thread> threads;
  for (int t = 0; t < 3; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < (t == 0 ? 4 : 3); ++i) {
        json body = {{"kind", "scan"}, {"plot", t}};
        if (t == 2) body = {{"kind", "sow"}, {"species", "radish"}, {"target", nullptr}};
        const auto r = f.call("POST", "/api/v1/tasks", toks[static_cast<std::size_t>(t)], body);
        REQUIRE(r.status == 201);
        std::lock_guard lock(mu);
        seen.emplace_back(r.body.at("task").at("id").get<std::int64_t>(), r.body.at("position").get<int>());
      }
    });
  }
  for (auto& th : threads) th.join();
  REQUIRE(seen.size() == 10);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i].second == static_cast<int>(i) + 1);
}

TEST_CASE("chat history is global and ordered; long messages are refused") {
  Fixture f;
  const auto a = f.login("ana");
  const auto b = f.login("bo");
  CHECK(f.call("GET", "/api/v1/chat", a).body.at("messages").empty());
  for (int i = 0; i < 4; ++i) f.call("POST", "/api/v1/chat", i % 2 ? b : a, {{"text", fmt::format("m{}", i)}});
  const auto ha = f.call("GET", "/api/v1/chat", a).body;
  const auto hb = f.call("GET", "/api/v1/chat", b).body;
  CHECK(ha == hb);
  REQUIRE(ha.at("messages").size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(ha.at("messages").at(i).at("id") == i + 1);

  std::string cps;
  for (int i = 0; i < 2000; ++i) cps += "\xc3\xa9";  // 2000 code points, 4000 bytes
  CHECK(f.call("POST", "/api/v1/chat", a, {{"text", cps}}).status == 201);
  const auto too_long = f.call("POST", "/api/v1/chat", a, {{"text", cps + "x"}});
  CHECK(error_code(too_long) == 603);
}

TEST_CASE("weather outage serves the last known sample flagged stale") {
  Fixture f;
  const auto a = f.login("ana");
  const auto fresh = f.call("GET", "/api/v1/weather", a);
  REQUIRE(fresh.status == 200);
  CHECK(fresh.body.at("stale") == false);
  f.provider->set_outage(true);
  const auto stale = f.call("GET", "/api/v1/weather", a);
  CHECK(stale.status == 200);
  CHECK(stale.body.at("stale") == true);
  CHECK(stale.body.at("current") == fresh.body.at("current"));
}

TEST_CASE("no endpoint mutates another user's plot") {
  Fixture f;
  const auto a = f.login("ana");
  const auto b = f.login("bo");
  const auto own = f.call("POST", "/api/v1/tasks", b, {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({1500, 500})}});
  REQUIRE(own.status == 201);
  f.garden.run_next();
  const auto plant_id = f.garden.read([](const auto& s) { return s.field.plants.begin()->first; });
  const auto pending = f.call("POST", "/api/v1/tasks", b, {{"kind", "scan"}, {"plot", 1}});
  const auto before = f.garden.snapshot();

  const std::vector<json> foreign_tasks = {
      {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({1500, 200})}},
      {{"kind", "water"}, {"plants", {plant_id}}},
      {{"kind", "water"}, {"water_all_plot", 1}},
      {{"kind", "weed"}, {"target", json::array({1500, 200})}},
      {{"kind", "moisture_read"}, {"target", json::array({1500, 200})}},
  };  // scans only read, so they are not in this list
  for (const auto& t : foreign_tasks) {
    CAPTURE(t.dump());
    const auto r = f.call("POST", "/api/v1/tasks", a, t);
    CHECK(r.status == 403);
  }
  CHECK(f.call("DELETE", "/api/v1/tasks/" + pending.body.at("task").at("id").dump(), a).status == 403);
  CHECK(f.call("DELETE", "/api/v1/plants/" + std::to_string(plant_id), a).status == 403);

  const auto after = f.garden.snapshot();
  CHECK(after.field == before.field);
  CHECK(after.queue == before.queue);
}

TEST_CASE("feedback lands on the timeline as a system event") {
  Fixture f;
  const auto a = f.login("ana");
  const auto r = f.call("POST", "/api/v1/feedback", a, {{"text", "the hose leaks"}});
  CHECK(r.status == 201);
  CHECK(r.body.at("kind") == "system");
  const auto tl = f.call("GET", "/api/v1/timeline", a, nullptr, {{"kind", "system"}}).body.at("events");
  REQUIRE(tl.size() == 1);
  CHECK(tl.at(0).at("payload").at("text") == "the hose leaks");
}

TEST_CASE("mode switch through the API hides care actions for automated users") {
  Fixture f;
  const auto b = f.login("bo");
  CHECK(f.call("PUT", "/api/v1/mode", b, {{"mode", "automated"}}).body.at("old") == "hybrid");
  CHECK(f.call("GET", "/api/v1/mode", b).body.at("mode") == "automated");
  const auto r = f.call("POST", "/api/v1/tasks", b, {{"kind", "weed"}, {"target", json::array({1500, 500})}});
  CHECK(r.status == 409);
  CHECK(f.call("PUT", "/api/v1/mode", b, {{"mode", "lazy"}}).status == 400);
}

TEST_CASE("render endpoints return PPM rasters") {
  Fixture f;
  const auto a = f.login("ana");
  for (const auto* p : {"topdown", "cameraA", "cameraB", "cameraC"}) {
    const auto r = f.call("GET", "/api/v1/field/render", a, nullptr, {{"perspective", p}, {"mm_per_px", "50"}});
    REQUIRE(r.raw);
    CHECK(r.raw->rfind("P6\n", 0) == 0);
  }
  CHECK(f.call("GET", "/api/v1/timelapse", a).status == 404);
  f.garden.open_day(1, {});
  f.garden.close_day(1);
  const auto tl = f.call("GET", "/api/v1/timelapse", a, nullptr, {{"plot", "0"}});
  REQUIRE(tl.body.at("frames").size() == 1);
  CHECK(f.call("GET", "/api/v1/timelapse/0", a, nullptr, {{"plot", "0"}}).raw.has_value());
}

TEST_CASE("one executed water task streams moves, actuation, queue done and the timeline event in order") {
  Fixture f;
  const auto a = f.login("ana");
  f.call("POST", "/api/v1/tasks", a, {{"kind", "sow"}, {"species", "radish"}, {"target", json::array({500, 500})}});
  f.garden.run_next();
  const auto sub = f.hub.subscribe({}, std::nullopt);
  f.call("POST", "/api/v1/tasks", a, {{"kind", "water"}, {"water_all_plot", 0}});
  f.garden.run_next();
  const auto events = sub->drain();
  std::vector<std::string> order;
  for (const auto& e : events) {
    const auto label = e.type == "entry" ? "entry:" + e.data.at("entry").at("state").get<std::string>() : e.type;
    if (order.empty() || order.back() != label) order.push_back(label);
  }
  const auto pos = [&](const std::string& l) {
    return std::find(order.begin(), order.end(), l) - order.begin();
  };
  CHECK(pos("entry:pending") < pos("entry:executing"));
  CHECK(pos("entry:executing") < pos("gantry"));
  CHECK(pos("gantry") < pos("actuation"));
  CHECK(pos("actuation") < pos("event"));
  CHECK(pos("event") < pos("entry:done"));
  CHECK(pos("entry:done") < static_cast<long>(order.size()));
  for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].seq == events[i - 1].seq + 1);
}

TEST_CASE("no activity means no stream events") {
  Fixture f;
  const auto sub = f.hub.subscribe({}, std::nullopt);
  CHECK_FALSE(sub->next(std::chrono::milliseconds(20)).has_value());
}

TEST_CASE("resuming with a cursor yields no gaps and no duplicates") {
  Fixture f;
  const auto a = f.login("ana");
  std::mt19937_64 rng(11);
  std::vector<std::int64_t> got;
  auto sub = f.hub.subscribe({}, 0);
  for (int round = 0; round < 40; ++round) {
    f.call("POST", "/api/v1/chat", a, {{"text", fmt::format("r{}", round)}});
    if (round % 3 == 0)
      f.call("POST", "/api/v1/tasks", a, {{"kind", "moisture_read"}, {"target", json::array({100 + round, 100})}});
    if (round % 5 == 0) f.garden.run_until(f.garden.clock().now() + std::chrono::hours(1));
    const auto take = rng() % 7;
    for (std::uint64_t i = 0; i < take; ++i) {
      auto e = sub->next(std::chrono::milliseconds(0));
      if (!e) break;
      got.push_back(e->seq);
    }
    if (rng() % 2) sub = f.hub.subscribe({}, sub->cursor());  // disconnect, resume
  }
  for (const auto& e : sub->drain()) got.push_back(e.seq);
  REQUIRE(!got.empty());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == static_cast<std::int64_t>(i) + 1);
  CHECK(got.back() == f.hub.last_seq());
}

TEST_CASE("slow consumer is dropped with a resume cursor") {
  garden::Garden g(garden::GardenConfig{});
  StreamHub hub(1000, 4);
  g.attach_sink(&hub);
  const auto sub = hub.subscribe({"chat"}, std::nullopt);
  g.register_user("ana", "Ana", 0, "", ControlMode::manual);
  for (int i = 0; i < 6; ++i) g.post_chat("ana", "x");
  for (int i = 0; i < 4; ++i) CHECK(sub->next(std::chrono::milliseconds(0)).has_value());
  try {
    sub->next(std::chrono::milliseconds(0));
    FAIL("expected SlowConsumer");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSlowConsumer);
    const auto resumed = hub.subscribe({"chat"}, e.details().at("cursor").get<std::int64_t>());
    CHECK(resumed->drain().size() == 2);
  }
}

TEST_CASE("expired cursors are refused") {
  garden::Garden g(garden::GardenConfig{});
  StreamHub hub(3, 16);
  g.attach_sink(&hub);
  g.register_user("ana", "Ana", 0, "", ControlMode::manual);
  for (int i = 0; i < 10; ++i) g.post_chat("ana", "x");
  CHECK_THROWS_AS(hub.subscribe({}, 2), Error);
  CHECK_THROWS_AS(hub.subscribe({}, 99), Error);
  CHECK(hub.subscribe({}, 7)->drain().size() == 3);
}

TEST_CASE("http server speaks JSON and SSE") {
  Fixture f;
  HttpServer server(f.api, HttpConfig{"127.0.0.1", 0, std::chrono::milliseconds(50), ""});
  const int port = server.bind();
  std::thread th([&] { server.listen(); });

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/api/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  auto login = cli.Post("/api/v1/login", R"({"user_id":"ana","password":"pw"})", "application/json");
  REQUIRE(login);
  const auto tok = json::parse(login->body).at("token").get<std::string>();
  httplib::Headers auth{{"Authorization", "Bearer " + tok}};
  CHECK(cli.Get("/api/v1/queue")->status == 401);
  CHECK(cli.Get("/api/v1/queue", auth)->status == 200);
  auto chat = cli.Post("/api/v1/chat", auth, R"({"text":"hi"})", "application/json");
  CHECK(chat->status == 201);

  std::string received;
  httplib::Client sse("127.0.0.1", port);
  sse.set_read_timeout(2, 0);
  sse.Get("/api/v1/stream?topics=chat&cursor=0", auth, [&](const char* data, std::size_t n) {
    received.append(data, n);
    return received.find("\"hi\"") == std::string::npos;
  });
  CHECK(received.find("event: message") != std::string::npos);
  CHECK(received.find("id: ") != std::string::npos);

  server.stop();
  th.join();
}
