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

#include "plotbot/scenario/script.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "plotbot/error.hpp"
#include "plotbot/sched/weather.hpp"

namespace plotbot::scenario {

std::string format_diagnostic(const std::string& source, const Diagnostic& d) {
  return d.line > 0 ? fmt::format("{}:{}: {}", source, d.line, d.message) : fmt::format("{}: {}", source, d.message);
}

std::string_view to_string(Verb v) noexcept {
  switch (v) {
    case Verb::login: return "login";
    case Verb::logout: return "logout";
    case Verb::sow: return "sow";
    case Verb::water_all: return "water";
    case Verb::weed: return "weed";
    case Verb::scan: return "scan";
    case Verb::moisture: return "moisture";
    case Verb::chat: return "chat";
    case Verb::feedback: return "feedback";
    case Verb::weeds: return "weeds";
  }
  return "?";
}

namespace {

struct Token {
  std::string text;
  std::size_t offset = 0;
};

// Whitespace split; double quotes group, '#' outside quotes ends the line.
std::vector<Token> tokenize(const std::string& line, std::string* error) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    Token t{{}, i};
    bool quoted = false;
    while (i < line.size() && (quoted || !std::isspace(static_cast<unsigned char>(line[i])))) {
      if (line[i] == '"') {
        quoted = !quoted;
      } else {
        t.text += line[i];
      }
      ++i;
    }
    if (quoted) *error = "unterminated quote";
    out.push_back(std::move(t));
  }
  return out;
}

template <class T>
std::optional<T> number(std::string_view s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<Coord2> coord(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const auto x = number<int>(s.substr(0, comma));
  const auto y = number<int>(s.substr(comma + 1));
  if (!x || !y) return std::nullopt;
  return Coord2{*x, *y};
}

std::optional<int> time_of_day(std::string_view s) {
  int parts[3] = {0, 0, 0};
  int n = 0;
  std::size_t start = 0;
  while (n < 3) {
    const auto colon = s.find(':', start);
    const auto v = number<int>(s.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (!v) return std::nullopt;
    parts[n++] = *v;
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (n < 2 || parts[0] < 0 || parts[0] > 23 || parts[1] < 0 || parts[1] > 59 || parts[2] < 0 || parts[2] > 59)
    return std::nullopt;
  return parts[0] * 3600 + parts[1] * 60 + parts[2];
}

std::optional<std::pair<int, int>> day_range(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    const auto d = number<int>(s);
    if (!d) return std::nullopt;
    return std::pair{*d, *d};
  }
  const auto a = number<int>(s.substr(0, dash));
  const auto b = number<int>(s.substr(dash + 1));
  if (!a || !b) return std::nullopt;
  return std::pair{*a, *b};
}

// key=value options after the positional arguments.
std::map<std::string, std::string> options(const std::vector<Token>& t, std::size_t from, std::string* bad) {
  std::map<std::string, std::string> out;
  for (std::size_t i = from; i < t.size(); ++i) {
    const auto eq = t[i].text.find('=');
    if (eq == std::string::npos) {
      *bad = t[i].text;
      continue;
    }
    out[t[i].text.substr(0, eq)] = t[i].text.substr(eq + 1);
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::filesystem::path base) { result_.script.base_dir = std::move(base); }

  void line(int no, const std::string& raw) {
    line_ = no;
    raw_ = raw;
    std::string err;
    const auto t = tokenize(raw, &err);
    if (!err.empty()) return diag(err);
    if (t.empty()) return;
    const auto& kw = t[0].text;
    auto& s = result_.script;
    if (kw == "days" || kw == "seed" || kw == "acceleration" || kw == "name") {
      if (t.size() != 2) return diag(fmt::format("'{}' takes one value", kw));
      if (kw == "days") {
        const auto v = number<int>(t[1].text);
        if (!v || *v < 0 || *v > 3660) return diag(fmt::format("days must be an integer in 0..3660, got '{}'", t[1].text));
        s.days = *v;
        days_line_ = no;
      } else if (kw == "seed") {
        const auto v = number<std::uint64_t>(t[1].text);
        if (!v) return diag(fmt::format("seed must be a non-negative integer, got '{}'", t[1].text));
        s.seed = *v;
      } else if (kw == "acceleration") {
        const auto v = number<double>(t[1].text);
        if (!v || !(*v > 0)) return diag(fmt::format("acceleration must be positive, got '{}'", t[1].text));
        s.acceleration = *v;
      } else {
        s.name = t[1].text;
      }
    } else if (kw == "weather") {
      if (t.size() < 2) return diag("weather needs a trace path or 'stub'");
      if (t[1].text == "stub") {
        std::string bad;
        const auto o = options(t, 2, &bad);
        if (!bad.empty()) return diag(fmt::format("unexpected '{}'", bad));
        double p = 0.2;
        if (o.contains("rain")) {
          const auto v = number<double>(o.at("rain"));
          if (!v || *v < 0 || *v > 1) return diag("rain probability must be in [0, 1]");
          p = *v;
        }
        s.stub_rain_probability = p;
      } else {
        if (t.size() != 2) return diag("weather takes one path");
        s.weather_trace = t[1].text;
        weather_line_ = no;
      }
    } else if (kw == "noise") {
      std::string bad;
      const auto o = options(t, 1, &bad);
      if (!bad.empty()) return diag(fmt::format("unexpected '{}'", bad));
      for (const auto& [k, v] : o) {
        if (k == "bias" || k == "daily") {
          const auto x = number<double>(v);
          if (!x || *x < 0) return diag(fmt::format("noise {} must be >= 0", k));
          (k == "bias" ? s.noise.bias_sigma : s.noise.daily_sigma) = *x;
        } else if (k == "seed") {
          const auto x = number<std::uint64_t>(v);
          if (!x) return diag("noise seed must be a non-negative integer");
          s.noise.seed = *x;
        } else {
          return diag(fmt::format("unknown noise option '{}'", k));
        }
      }
    } else if (kw == "field" || kw == "species") {
      if (t.size() != 2) return diag(fmt::format("'{}' takes one path", kw));
      (kw == "field" ? s.field_config : s.species_config) = t[1].text;
    } else if (kw == "user") {
      user(t);
    } else if (kw == "mode") {
      mode(t);
    } else if (kw == "at") {
      if (t.size() < 4) return diag("expected: at <day> <HH:MM> <action>");
      const auto day = number<int>(t[1].text);
      if (!day) return diag(fmt::format("bad day '{}'", t[1].text));
      const auto tod = time_of_day(t[2].text);
      if (!tod) return diag(fmt::format("bad time '{}'", t[2].text));
      if (auto a = action(t, 3)) s.actions.push_back({*day, *tod, *a, no});
    } else if (kw == "daily") {
      if (t.size() < 3) return diag("expected: daily <HH:MM> [days=a-b] <action>");
      const auto tod = time_of_day(t[1].text);
      if (!tod) return diag(fmt::format("bad time '{}'", t[1].text));
      std::size_t at = 2;
      std::optional<std::pair<int, int>> range;
      if (t[2].text.rfind("days=", 0) == 0) {
        range = day_range(t[2].text.substr(5));
        if (!range || range->first > range->second) return diag(fmt::format("bad day range '{}'", t[2].text));
        at = 3;
      }
      if (auto a = action(t, at)) daily_.push_back({range, *tod, *a, no});
    } else {
      diag(fmt::format("unknown directive '{}'", kw));
    }
  }

  ParseResult finish() {
    auto& s = result_.script;
    if (days_line_ == 0) result_.diagnostics.push_back({0, "missing 'days'"});
    if (s.weather_trace && s.stub_rain_probability)
      result_.diagnostics.push_back({weather_line_, "only one weather source may be given"});
    for (const auto& d : daily_) {
      const auto [a, b] = d.range.value_or(std::pair{1, s.days});
      for (int day = a; day <= b; ++day) s.actions.push_back({day, d.second, d.action, d.line});
    }
    std::stable_sort(s.actions.begin(), s.actions.end(), [](const TimedAction& x, const TimedAction& y) {
      return std::tie(x.day, x.second_of_day, x.line) < std::tie(y.day, y.second_of_day, y.line);
    });
    return std::move(result_);
  }

 private:
  struct Daily {
    std::optional<std::pair<int, int>> range;
    int second = 0;
    Action action;
    int line = 0;
  };

  void diag(std::string msg) { result_.diagnostics.push_back({line_, std::move(msg)}); }

  void user(const std::vector<Token>& t) {
    if (t.size() < 3) return diag("expected: user <id> plot=<n> [name=<s>] [password=<s>]");
    UserSpec u;
    u.id = t[1].text;
    u.line = line_;
    std::string bad;
    const auto o = options(t, 2, &bad);
    if (!bad.empty()) return diag(fmt::format("unexpected '{}'", bad));
    for (const auto& [k, v] : o) {
      if (k == "plot") {
        const auto p = number<int>(v);
        if (!p) return diag(fmt::format("bad plot '{}'", v));
        u.plot = *p;
      } else if (k == "name") {
        u.name = v;
      } else if (k == "password") {
        u.password = v;
      } else {
        return diag(fmt::format("unknown user option '{}'", k));
      }
    }
    if (!o.contains("plot")) return diag(fmt::format("user {} has no plot", u.id));
    if (u.name.empty()) u.name = u.id;
    result_.script.users.push_back(std::move(u));
  }

  void mode(const std::vector<Token>& t) {
    if (t.size() != 4) return diag("expected: mode <user> <day>[-<day>] <manual|hybrid|automated>");
    const auto r = day_range(t[2].text);
    if (!r || r->first > r->second) return diag(fmt::format("bad day range '{}'", t[2].text));
    const auto m = policy::mode_from_string(t[3].text);
    if (!m) return diag(fmt::format("unknown mode '{}'", t[3].text));
    result_.script.modes.push_back({t[1].text, r->first, r->second, *m, line_});
  }

  std::optional<Action> action(const std::vector<Token>& t, std::size_t i) {
    const auto& verb = t[i].text;
    const auto args = t.size() - i - 1;
    const auto arg = [&](std::size_t k) -> const std::string& { return t[i + 1 + k].text; };
    const auto rest = [&](std::size_t k) {
      auto s = raw_.substr(t[i + 1 + k].offset);
      if (const auto hash = s.find(" #"); hash != std::string::npos) s = s.substr(0, hash);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
      if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
      return s;
    };
    const auto fail = [&](std::string msg) -> std::optional<Action> {
      diag(std::move(msg));
      return std::nullopt;
    };
    Action a;
    if (verb != "weeds") {
      if (args < 1) return fail(fmt::format("'{}' needs a user", verb));
      a.user = arg(0);
    }
    if (verb == "login" || verb == "logout") {
      if (args != 1) return fail(fmt::format("'{}' takes only a user", verb));
      a.verb = verb == "login" ? Verb::login : Verb::logout;
    } else if (verb == "sow") {
      a.verb = Verb::sow;
      if (args < 3) return fail("expected: sow <user> <species> <x>,<y> | auto [xN]");
      a.species = arg(1);
      if (arg(2) == "auto") {
        if (args == 4) {
          const auto n = arg(3).size() > 1 && arg(3)[0] == 'x' ? number<int>(std::string_view(arg(3)).substr(1)) : std::nullopt;
          if (!n || *n < 1) return fail(fmt::format("bad count '{}', expected xN", arg(3)));
          a.count = *n;
        } else if (args != 3) {
          return fail("too many arguments to sow");
        }
      } else {
        a.at = coord(arg(2));
        if (!a.at || args != 3) return fail(fmt::format("bad sow target '{}'", arg(2)));
      }
    } else if (verb == "water") {
      a.verb = Verb::water_all;
      if (args != 2 || arg(1) != "all") return fail("expected: water <user> all");
    } else if (verb == "weed" || verb == "moisture") {
      a.verb = verb == "weed" ? Verb::weed : Verb::moisture;
      if (args != 2) return fail(fmt::format("expected: {} <user> <x>,<y>", verb));
      a.at = coord(arg(1));
      if (!a.at) return fail(fmt::format("bad coordinate '{}'", arg(1)));
    } else if (verb == "scan") {
      a.verb = Verb::scan;
      if (args == 2) {
        a.plot = number<int>(arg(1));
        if (!a.plot) return fail(fmt::format("bad plot '{}'", arg(1)));
      } else if (args != 1) {
        return fail("expected: scan <user> [plot]");
      }
    } else if (verb == "chat" || verb == "feedback") {
      a.verb = verb == "chat" ? Verb::chat : Verb::feedback;
      if (args < 2) return fail(fmt::format("'{}' needs text", verb));
      a.text = rest(1);
    } else if (verb == "weeds") {
      a.verb = Verb::weeds;
      if (args != 2) return fail("expected: weeds <plot> <count>");
      a.plot = number<int>(arg(0));
      const auto n = number<int>(arg(1));
      if (!a.plot || !n || *n < 1) return fail("bad weeds arguments");
      a.count = *n;
    } else {
      return fail(fmt::format("unknown action '{}'", verb));
    }
    return a;
  }

  ParseResult result_;
  std::vector<Daily> daily_;
  int line_ = 0;
  std::string raw_;
  int days_line_ = 0;
  int weather_line_ = 0;
};

}  // namespace

ParseResult parse_script(std::istream& in, const std::filesystem::path& base_dir) {
  Parser p(base_dir);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    p.line(no, line);
  }
  return p.finish();
}

ParseResult load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.diagnostics.push_back({0, fmt::format("cannot open {}", path.string())});
    return r;
  }
  return parse_script(in, path.parent_path());
}

garden::GardenConfig garden_config_for(const Script& script) {
  garden::GardenConfig cfg;
  try {
    if (script.field_config) {
      std::ifstream in(script.resolve(*script.field_config));
      if (!in) throw Error(ErrorCode::kScriptInvalid, fmt::format("cannot open field config {}", script.field_config->string()));
      cfg.field = nlohmann::json::parse(in).get<gantry::FieldConfig>();
    }
    if (script.species_config) cfg.species = policy::SpeciesCatalog::load(script.resolve(*script.species_config).string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kScriptInvalid, fmt::format("config: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kScriptInvalid) throw;
    throw Error(ErrorCode::kScriptInvalid, e.what());
  }
  cfg.noise = script.noise;
  cfg.epoch = garden::GardenConfig{}.epoch;
  return cfg;
}

std::vector<Diagnostic> validate_script(const Script& s) {
  std::vector<Diagnostic> out;
  garden::GardenConfig cfg;
  try {
    cfg = garden_config_for(s);
    cfg.validate();
  } catch (const Error& e) {
    out.push_back({0, e.what()});
    return out;
  }
  const field::FieldState field(cfg.field);
  const int plots = static_cast<int>(field.plots.size());

  std::map<std::string, const UserSpec*> users;
  std::map<int, std::string> plot_owner;
  for (const auto& u : s.users) {
    if (u.id == tasks::kRobotActor) out.push_back({u.line, fmt::format("user id '{}' is reserved", u.id)});
    if (!users.emplace(u.id, &u).second) out.push_back({u.line, fmt::format("duplicate user '{}'", u.id)});
    if (u.plot < 0 || u.plot >= plots) {
      out.push_back({u.line, fmt::format("plot {} does not exist (0..{})", u.plot, plots - 1)});
    } else if (const auto [it, fresh] = plot_owner.emplace(u.plot, u.id); !fresh) {
      out.push_back({u.line, fmt::format("plot {} is already assigned to {}", u.plot, it->second)});
    }
  }

  std::map<std::string, std::vector<const ModeSpan*>> spans;
  for (const auto& m : s.modes) {
    if (!users.contains(m.user)) {
      out.push_back({m.line, fmt::format("mode for unknown user '{}'", m.user)});
      continue;
    }
    if (m.from < 1 || m.to > std::max(s.days, 1))
      out.push_back({m.line, fmt::format("days {}-{} fall outside 1..{}", m.from, m.to, s.days)});
    for (const auto* other : spans[m.user]) {
      if (m.from <= other->to && other->from <= m.to)
        out.push_back({m.line, fmt::format("mode schedule for {} overlaps line {}", m.user, other->line)});
    }
    spans[m.user].push_back(&m);
  }
  for (const auto& u : s.users) {
    std::vector<bool> covered(static_cast<std::size_t>(std::max(s.days, 1)) + 1, false);
    for (const auto* m : spans[u.id])
      for (int d = std::max(m->from, 1); d <= std::min(m->to, std::max(s.days, 1)); ++d) covered[static_cast<std::size_t>(d)] = true;
    std::vector<int> missing;
    for (int d = 1; d <= std::max(s.days, 1); ++d)
      if (!covered[static_cast<std::size_t>(d)]) missing.push_back(d);
    if (!missing.empty())
      out.push_back({u.line, fmt::format("mode schedule for {} does not cover day {}{}", u.id, missing.front(),
                                         missing.size() > 1 ? fmt::format(" (and {} more)", missing.size() - 1) : "")});
  }

  for (const auto& a : s.actions) {
    const auto& act = a.action;
    if (a.day < 1 || a.day > s.days) out.push_back({a.line, fmt::format("day {} is outside 1..{}", a.day, s.days)});
    if (act.verb != Verb::weeds && !users.contains(act.user))
      out.push_back({a.line, fmt::format("unknown user '{}'", act.user)});
    if (act.verb == Verb::sow && !cfg.species.contains(act.species))
      out.push_back({a.line, fmt::format("unknown species '{}'", act.species)});
    if (act.plot && (*act.plot < 0 || *act.plot >= plots))
      out.push_back({a.line, fmt::format("plot {} does not exist", *act.plot)});
    if (act.at && !field.in_field(*act.at))
      out.push_back({a.line, fmt::format("point {},{} lies outside the field", act.at->x_mm, act.at->y_mm)});
    if ((act.verb == Verb::chat || act.verb == Verb::feedback) && garden::utf8_length(act.text) > garden::kMaxChatCodePoints)
      out.push_back({a.line, fmt::format("text exceeds {} characters", garden::kMaxChatCodePoints)});
  }

  if (s.weather_trace) {
    try {
      sched::load_weather_trace(s.resolve(*s.weather_trace));
    } catch (const Error& e) {
      out.push_back({0, e.what()});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  return out;
}

}  // namespace plotbot::scenario
