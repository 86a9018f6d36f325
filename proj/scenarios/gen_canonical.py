#!/usr/bin/env python3
# Copyright 2026 The plotbot Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes canonical.scn, canonical_stochastic.scn and canonical.weather.

18 gardeners over 21 days. Predominant modes 5 automated, 3 manual,
10 hybrid, with a few short switches. 250 sows on days 1-8, evening Water
All for everyone not in automated mode, rain in weeks 2-3, 1217 logins.
"""

import argparse
import random
from pathlib import Path

DAYS = 21
USERS = 18
SOWS_TOTAL = 250
LOGINS_TOTAL = 1217
SPECIES = ["radish", "lettuce", "marigold", "cornflower", "cumin"]
RAIN_DAYS = {9, 11, 12, 15, 18, 19}
PLOT_MM = 1000
COLS = 6

HEADER = """# Copyright 2026 The plotbot Authors
# Licensed under the Apache License, Version 2.0
# Generated by gen_canonical.py; edit the generator, not this file.
"""


def hhmm(sec):
    return f"{sec // 3600:02d}:{sec % 3600 // 60:02d}:{sec % 60:02d}"


def build(rng):
    users = [f"g{i + 1:02d}" for i in range(USERS)]
    base = ["automated"] * 5 + ["manual"] * 3 + ["hybrid"] * 10
    rng.shuffle(base)

    # Per user, per day mode. Switches stay short so the predominant mode holds.
    schedule = {u: [base[i]] * DAYS for i, u in enumerate(users)}
    hybrids = [u for i, u in enumerate(users) if base[i] == "hybrid"]
    manuals = [u for i, u in enumerate(users) if base[i] == "manual"]
    autos = [u for i, u in enumerate(users) if base[i] == "automated"]
    for u in rng.sample(hybrids, 4):
        start = rng.randint(10, 16)
        for d in range(start, start + rng.randint(2, 4)):
            schedule[u][d - 1] = "manual"
    for u in rng.sample(manuals, 1):
        start = rng.randint(12, 17)
        for d in range(start, start + 3):
            schedule[u][d - 1] = "hybrid"
    for u in rng.sample(autos, 1):
        # after sowing is over
        start = rng.randint(12, 15)
        for d in range(start, start + 2):
            schedule[u][d - 1] = "hybrid"

    counts = [14] * USERS
    for i in rng.sample(range(USERS), 2):
        counts[i] = 13
    assert sum(counts) == SOWS_TOTAL

    actions = []  # (day, second, text)
    first_sow_day = {}
    for i, u in enumerate(users):
        plot = i
        ox, oy = (plot % COLS) * PLOT_MM, (plot // COLS) * PLOT_MM
        days = sorted(rng.choices(range(1, 9), k=counts[i]))
        if base[i] == "automated":
            per_day = {}
            for d in days:
                per_day[d] = per_day.get(d, 0) + 1
            for d, n in sorted(per_day.items()):
                sp = rng.choice(SPECIES)
                sec = rng.randint(8 * 3600, 15 * 3600)
                actions.append((d, sec, f"sow {u} {sp} auto x{n}"))
        else:
            cells = [(125 + 250 * c, 125 + 250 * r) for r in range(4) for c in range(4)]
            rng.shuffle(cells)
            for d, (cx, cy) in zip(days, cells):
                sp = rng.choice(SPECIES)
                sec = rng.randint(8 * 3600, 15 * 3600)
                actions.append((d, sec, f"sow {u} {sp} {ox + cx},{oy + cy}"))
        first_sow_day[u] = days[0]

    # Evening watering whenever the gardener is not automated.
    for u in users:
        for d in range(first_sow_day[u] + 1, DAYS + 1):
            if schedule[u][d - 1] != "automated":
                actions.append((d, 18 * 3600 + rng.randint(0, 1800), f"water {u} all"))

    # Logins: every gardener visits every day, a few twice or more.
    pairs = [(d, u) for d in range(1, DAYS + 1) for u in users]
    visits = {p: 3 for p in pairs}
    for p in rng.sample(pairs, LOGINS_TOTAL - 3 * len(pairs)):
        visits[p] += 1
    for (d, u), n in visits.items():
        for _ in range(n):
            sec = rng.randint(7 * 3600, 22 * 3600)
            actions.append((d, sec, f"login {u}"))
            if rng.random() < 0.5:
                actions.append((d, min(sec + rng.randint(60, 1800), 86000), f"logout {u}"))

    for d in range(1, DAYS + 1):
        for _ in range(rng.randint(1, 5)):
            u = rng.choice(users)
            actions.append((d, rng.randint(8 * 3600, 21 * 3600), f'chat {u} "{rng.choice(CHAT)}"'))
        if d % 3 == 0:
            for plot in rng.sample(range(USERS), 3):
                actions.append((d, rng.randint(3600, 5 * 3600), f"weeds {plot} {rng.randint(1, 3)}"))
        for u in rng.sample(users, 2):
            if schedule[u][d - 1] != "automated":
                actions.append((d, rng.randint(9 * 3600, 17 * 3600), f"scan {u}"))
        u = rng.choice(users)
        i = users.index(u)
        ox, oy = (i % COLS) * PLOT_MM, (i // COLS) * PLOT_MM
        actions.append((d, rng.randint(9 * 3600, 17 * 3600), f"moisture {u} {ox + 500},{oy + 500}"))
        if d >= 10 and d % 2 == 0:
            u = rng.choice([v for v in users if schedule[v][d - 1] != "automated"])
            i = users.index(u)
            ox, oy = (i % COLS) * PLOT_MM, (i // COLS) * PLOT_MM
            actions.append((d, rng.randint(9 * 3600, 17 * 3600), f"weed {u} {ox + 250},{oy + 250}"))
    for d in (7, 14, 21):
        for u in rng.sample(users, 3):
            actions.append((d, rng.randint(19 * 3600, 22 * 3600), f'feedback {u} "{rng.choice(FEEDBACK)}"'))

    actions.sort()
    return users, schedule, actions


CHAT = [
    "morning all",
    "my radishes are up!",
    "who is watering plot 4?",
    "the robot is busy again",
    "rain tomorrow, skipping water",
    "nice marigolds",
    "anyone seen weeds near the path?",
    "lettuce looks thirsty",
    "thanks for the tip",
    "queue is long today",
]
FEEDBACK = [
    "watching the robot move is fun",
    "would like a reminder when my task finishes",
    "hybrid mode saved me from overwatering",
    "time-lapse is great",
]


def mode_lines(users, schedule):
    out = []
    for u in users:
        row = schedule[u]
        start = 1
        for d in range(2, DAYS + 2):
            if d == DAYS + 1 or row[d - 1] != row[start - 1]:
                span = f"{start}-{d - 1}" if d - 1 > start else f"{start}"
                out.append(f"mode {u} {span} {row[start - 1]}")
                start = d
    return out


def script_text(name, users, schedule, actions, noise):
    lines = [HEADER, f"name {name}", f"days {DAYS}", "acceleration 10000", "seed 42",
             "weather canonical.weather", "field ../config/field.json", "species ../config/species.json"]
    if noise:
        lines.append(noise)
    lines.append("")
    for i, u in enumerate(users):
        lines.append(f"user {u} plot={i} name=Gardener{i + 1:02d}")
    lines.append("")
    lines += mode_lines(users, schedule)
    lines.append("")
    for d, sec, text in actions:
        lines.append(f"at {d} {hhmm(sec)} {text}")
    return "\n".join(lines) + "\n"


def weather_text():
    lines = [HEADER.rstrip("\n"), "# timestamp raining rainfall_mm temperature_c"]
    rng = random.Random(7)
    for d in range(1, DAYS + 1):
        for h in range(24):
            rain = d in RAIN_DAYS and 9 <= h < 15
            temp = 14 + 6 * (1 - abs(h - 14) / 14) + rng.uniform(-1, 1) - (3 if rain else 0)
            mm = round(rng.uniform(0.5, 2.5), 1) if rain else 0.0
            lines.append(f"2024-06-{2 + d:02d}T{h:02d}:00:00Z {1 if rain else 0} {mm} {temp:.1f}")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=Path(__file__).parent, type=Path)
    ap.add_argument("--noise", default="noise bias=0.25 daily=0.1 seed=3")
    args = ap.parse_args()
    users, schedule, actions = build(random.Random(2024))
    (args.out / "canonical.scn").write_text(script_text("canonical", users, schedule, actions, None))
    (args.out / "canonical_stochastic.scn").write_text(
        script_text("canonical-stochastic", users, schedule, actions, args.noise))
    (args.out / "canonical.weather").write_text(weather_text())


if __name__ == "__main__":
    main()
