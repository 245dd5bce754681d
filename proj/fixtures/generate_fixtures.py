#!/usr/bin/env python3
"""Regenerates the bundled fixtures. Deterministic: fixed seeds throughout."""

import csv
import json
import math
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent
KT = 0.514444


def dump(path, obj):
    path = ROOT / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def node(id_, x, y, kind, name=None, runway=None):
    n = {"id": id_, "name": name or id_, "x": x, "y": y, "kind": kind}
    if runway:
        n["runway"] = runway
    return n


def link(a, b, **extra):
    return {"a": a, "b": b, **extra}


# ---------------------------------------------------------------- graphs

def haneda():
    nodes, links = [], []
    for i in range(3, 0, -1):
        nodes.append(node(f"App_34R_{i:03d}", 0.0, -1200.0 * i, "RUNWAY", f"Final 34R {i}"))
    for i in range(1, 13):
        nodes.append(node(f"Rwy_03_{i:03d}", 0.0, 250.0 * (i - 1), "RUNWAY", "Runway 34R", "34R/16L"))
    for i in range(1, 13):
        nodes.append(node(f"Txy_C_{i:03d}", -300.0, 250.0 * (i - 1), "TAXIWAY", "Taxiway C"))
    nodes.append(node("Txy_C1_C", -150.0, 0.0, "HOLD", "Holding point C1"))
    nodes.append(node("Txy_C3_C3B", -150.0, 500.0, "HOLD", "Holding point C3"))
    nodes.append(node("Txy_C5_C5B", -150.0, 1250.0, "HOLD", "Holding point C5"))
    nodes.append(node("Ramp_CG", -600.0, 1500.0, "RAMP", "Coast guard apron"))
    nodes.append(node("Spot_18", -600.0, 250.0, "GATE", "Spot 18"))

    approach = {"speed_mean_kt": 135.0, "speed_std_kt": 8.0}
    links.append(link("App_34R_003", "App_34R_002", **approach))
    links.append(link("App_34R_002", "App_34R_001", **approach))
    links.append(link("App_34R_001", "Rwy_03_001", **approach))
    for i in range(1, 12):
        links.append(link(f"Rwy_03_{i:03d}", f"Rwy_03_{i + 1:03d}"))
        links.append(link(f"Txy_C_{i:03d}", f"Txy_C_{i + 1:03d}"))
    for hold, txy, rwy in [("Txy_C1_C", 1, 1), ("Txy_C3_C3B", 3, 3), ("Txy_C5_C5B", 6, 6)]:
        links.append(link(f"Txy_C_{txy:03d}", hold))
        links.append(link(hold, f"Rwy_03_{rwy:03d}"))
    links.append(link("Ramp_CG", "Txy_C_007"))
    links.append(link("Spot_18", "Txy_C_002"))
    return {"nodes": nodes, "links": links}


def katl():
    nodes, links = [], []
    for i in range(1, 7):
        nodes.append(node(f"Rwy_02_{i:03d}", 300.0 * (i - 1), 0.0, "RUNWAY", "Runway 8R", "08R/26L"))
    for i in range(2, 7):
        nodes.append(node(f"Txy_E_{i:03d}", 0.0, -450.0 - 300.0 * (i - 2), "TAXIWAY", "Taxiway E"))
    for i in range(3, 6):
        nodes.append(node(f"Txy_V_{i:03d}", 300.0 * (i - 2), -450.0, "TAXIWAY", "Taxiway V"))
    nodes.append(node("Gate_A10", -400.0, -1350.0, "GATE", "Gate A10"))
    nodes.append(node("Gate_C20", 400.0, -1050.0, "GATE", "Gate C20"))

    for i in range(1, 6):
        links.append(link(f"Rwy_02_{i:03d}", f"Rwy_02_{i + 1:03d}"))
    for i in range(6, 2, -1):
        links.append(link(f"Txy_E_{i:03d}", f"Txy_E_{i - 1:03d}"))
    links.append(link("Txy_E_002", "Rwy_02_001"))
    links.append(link("Txy_E_002", "Txy_V_003"))
    links.append(link("Txy_V_003", "Txy_V_004"))
    links.append(link("Txy_V_004", "Txy_V_005"))
    links.append(link("Txy_V_005", "Rwy_02_004"))
    links.append(link("Gate_A10", "Txy_E_005"))
    links.append(link("Gate_C20", "Txy_E_004"))
    return {"nodes": nodes, "links": links}


# Merge layouts for the oracle fixtures: per aircraft a list of
# (length m, mean kt, std kt) links into the merge node. Each aircraft leaves
# on an exit link with the same speed law as its final link.
MERGES = [
    # (a_links, b_links, r_c)
    ([(400.0, 20.0, 2.0)], [(400.0, 20.0, 2.0)], 8.0),
    ([(300.0, 15.0, 2.2), (300.0, 15.0, 1.2)], [(500.0, 15.0, 2.2), (100.0, 15.0, 1.2)], 10.0),
    ([(250.0, 20.0, 3.0), (250.0, 20.0, 3.0), (250.0, 20.0, 1.6)],
     [(300.0, 18.0, 2.7), (300.0, 18.0, 1.4)], 10.0),
    ([(600.0, 25.0, 3.5), (200.0, 25.0, 2.0)], [(200.0, 12.0, 1.8), (250.0, 12.0, 1.0)], 6.0),
    ([(350.0, 20.0, 3.0), (350.0, 20.0, 1.6)], [(500.0, 16.0, 2.4), (150.0, 16.0, 1.3)], 10.0),
]
EXIT_LENGTH = 400.0


def mean_time(links):
    total = 0.0
    for length, mean_kt, std_kt in links:
        mean, std = mean_kt * KT, std_kt * KT
        total += length * (1.0 + (std / mean) ** 2) / mean
    return total


def merges():
    nodes, links = [], []
    for k, (a_links, b_links, _) in enumerate(MERGES, start=1):
        x0 = 5000.0 * (k - 1)
        merge = f"M{k}_X"
        nodes.append(node(merge, x0, 0.0, "TAXIWAY"))
        for tag, link_spec, direction in [("A", a_links, (-1.0, 0.0)), ("B", b_links, (0.0, -1.0))]:
            dist = sum(s[0] for s in link_spec)
            ids = []
            for i, (length, _, _) in enumerate(link_spec):
                ids.append(f"M{k}_{tag}{i}")
                nodes.append(node(ids[-1], x0 + direction[0] * dist, direction[1] * dist, "TAXIWAY"))
                dist -= length
            ids.append(merge)
            for i, (length, mean_kt, std_kt) in enumerate(link_spec):
                links.append(link(ids[i], ids[i + 1], length=length,
                                  speed_mean_kt=mean_kt, speed_std_kt=std_kt))
            exit_id = f"M{k}_{tag}_EXIT"
            nodes.append(node(exit_id, x0 - direction[0] * EXIT_LENGTH, -direction[1] * EXIT_LENGTH, "TAXIWAY"))
            _, mean_kt, std_kt = link_spec[-1]
            links.append(link(merge, exit_id, length=EXIT_LENGTH, speed_mean_kt=mean_kt, speed_std_kt=std_kt))
    return {"nodes": nodes, "links": links}


# ------------------------------------------------------------ scenarios

def scenarios():
    for k, (a_links, b_links, r_c) in enumerate(MERGES, start=1):
        ma = mean_time(a_links)
        mb = mean_time(b_links)
        # Co-centre the expected arrivals at the merge node.
        start_a = round(max(0.0, mb - ma), 3)
        start_b = round(max(0.0, ma - mb), 3)
        path_a = [f"M{k}_A{i}" for i in range(len(a_links))] + [f"M{k}_X", f"M{k}_A_EXIT"]
        path_b = [f"M{k}_B{i}" for i in range(len(b_links))] + [f"M{k}_X", f"M{k}_B_EXIT"]
        dump(f"scenarios/mc_{k:02d}.json", {
            "graph": "../graphs/synthetic_merges.json",
            "spot": f"M{k}_X",
            "aircraft": [
                {"callsign": f"SYN{k}A", "nodes": path_a, "start_time": start_a},
                {"callsign": f"SYN{k}B", "nodes": path_b, "start_time": start_b},
            ],
            "r_c": r_c,
            "seed": 1000 + k,
            "samples": 1000000,
        })
    dump("scenarios/disjoint.json", {
        "graph": "../graphs/synthetic_merges.json",
        "aircraft": [
            {"callsign": "SYN1A", "nodes": ["M1_A0", "M1_X", "M1_A_EXIT"], "start_time": 0.0},
            {"callsign": "SYN2B", "nodes": ["M2_B0", "M2_B1", "M2_X", "M2_B_EXIT"], "start_time": 0.0},
        ],
        "r_c": 20.0,
        "seed": 7,
        "samples": 10000,
    })
    clearance = 17 * 3600 + 45 * 60 + 19
    dump("scenarios/haneda_case.json", {
        "graph": "../graphs/haneda.json",
        "aircraft": [
            {"callsign": "JA722A",
             "nodes": ["Ramp_CG", "Txy_C_007", "Txy_C_006", "Txy_C5_C5B", "Rwy_03_006", "Rwy_03_007"],
             "start_time": clearance},
            {"callsign": "JAL516",
             "nodes": ["App_34R_003", "App_34R_002", "App_34R_001"] +
                      [f"Rwy_03_{i:03d}" for i in range(1, 13)],
             "start_time": clearance},
        ],
        "r_c": 32.5,
        "seed": 20240102,
        "samples": 200000,
    })
    dump("scenarios/katl_case.json", {
        "graph": "../graphs/katl.json",
        "aircraft": [
            {"callsign": "DAL295",
             "nodes": ["Gate_A10", "Txy_E_005", "Txy_E_004", "Txy_E_003", "Txy_E_002", "Txy_V_003"],
             "start_time": 114.0},
            {"callsign": "EDV5526",
             "nodes": ["Gate_C20", "Txy_E_004", "Txy_E_003", "Txy_E_002", "Rwy_02_001"],
             "start_time": 114.0},
        ],
        "r_c": 32.5,
        "seed": 20240910,
        "samples": 200000,
    })


# ----------------------------------------------------------- transcripts

HANEDA = [
    ("17:43:02", "JAL516", "Tokyo Tower, Japan Air 516, approach, runway 34R, departure traffic in sight."),
    ("17:43:12", "TWR", "Japan Air 516, Tokyo Tower, good evening, runway 34R, wind 320 at 7, approach number one."),
    ("17:43:26", "TWR", "Delta 276, Tokyo Tower, runway 34R, taxi to holding point C1."),
    ("17:44:56", "TWR", "Japan Air 516, runway 34R, cleared to land, wind 310 at 8."),
    ("17:45:01", "JAL516", "Cleared to land runway 34R, Japan Air 516."),
    ("17:45:11", "TWR", "JA722A, Tokyo Tower, good evening, number 1, taxi to holding point C5."),
    ("17:45:19", "JA722A", "Taxi to holding point C5, JA722A, number 1, thank you."),
    ("17:45:40", "TWR", "Japan Air 179, Tokyo Tower, good evening, number 3, taxi to holding point C1."),
    ("17:45:56", "TWR", "Japan Air 166, Tokyo Tower, good evening, runway 34R, approach number two, wind 320 at 8."),
    ("17:47:23", "JAL166", "Tokyo Tower, Japan Air 166, approach, say again."),
    ("17:47:27", "TWR", "Japan Air 166, stand by."),
    ("17:47:30", "JAL516", "Japan Air 516, collision."),
    ("17:47:30", "JA722A", "JA722A, collision."),
]

KATL = [
    ("0:08", "GND", "Delta 295, Atlanta Ground, runway 8 right, taxi via Romeo."),
    ("0:14", "DAL295", "Runway 8 right, taxi, Delta 295."),
    ("0:20", "GND", "Delta 295, taxi via foxtrot, runway eight right."),
    ("0:33", "GND", "Delta 295, continue, hold short of ramp 5."),
    ("0:44", "GND", "Delta 295, give way to the inbound traffic, then join Echo."),
    ("0:50", "DAL295", "Give way to the company, Delta 295."),
    ("0:57", "GND", "Endeavor 5526, runway 8 right, taxi."),
    ("1:27", "GND", "Delta 295, go ahead."),
    ("1:35", "GND", "Delta 295, continue and hold."),
    ("1:45", "DAL295", "Delta 295 holding at Victor."),
    ("1:54", "TWR", "Endeavor 5526, line up and wait."),
    ("2:10", "EDV5526", "Endeavor 5526, collision."),
    ("2:10", "DAL295", "Delta 295, collision."),
]

# Expected (TIME, CALLSIGN, DESTINATION) triples for the case-study transcripts.
HANEDA_EXPECTED = [
    ("17:43:02", "Japan Air 516", "Rwy_03_001"),
    ("17:43:12", "Japan Air 516", "Rwy_03_001"),
    ("17:43:26", "Delta 276", "holding point C1(Txy_C1_C)"),
    ("17:44:56", "Japan Air 516", "Rwy_03_001"),
    ("17:45:01", "Japan Air 516", "Rwy_03_001"),
    ("17:45:11", "JA722A", "holding point C5(Txy_C5_C5B)"),
    ("17:45:19", "JA722A", "holding point C5(Txy_C5_C5B)"),
    ("17:45:40", "Japan Air 179", "holding point C1(Txy_C1_C)"),
    ("17:45:56", "Japan Air 166", "Rwy_03_001"),
    ("17:47:23", "Japan Air 166", ""),
    ("17:47:27", "Japan Air 166", ""),
    ("17:47:30", "Japan Air 516", ""),
    ("17:47:30", "JA722A", ""),
]

KATL_EXPECTED = [
    ("0:08", "Delta 295", "Romeo"),
    ("0:14", "Delta 295", "Rwy_02_001"),
    ("0:20", "Delta 295", "foxtrot"),
    ("0:33", "Delta 295", "ramp 5"),
    ("0:44", "Delta 295", "Echo(Txy_E_002)"),
    ("0:50", "Delta 295", ""),
    ("0:57", "Endeavor 5526", "Rwy_02_001"),
    ("1:27", "Delta 295", ""),
    ("1:35", "Delta 295", ""),
    ("1:45", "Delta 295", "Victor(Txy_V_003)"),
    ("1:54", "Endeavor 5526", ""),
    ("2:10", "Endeavor 5526", ""),
    ("2:10", "Delta 295", ""),
]


def transcripts():
    for name, rows in [("haneda", HANEDA), ("katl", KATL)]:
        lines = [json.dumps({"time": t, "speaker": s, "text": x}) for t, s, x in rows]
        path = ROOT / "transcripts" / f"{name}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    for name, rows in [("haneda", HANEDA_EXPECTED), ("katl", KATL_EXPECTED)]:
        with open(ROOT / "transcripts" / f"{name}_expected.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["TIME", "CALLSIGN", "DESTINATION"])
            w.writerows(rows)
    (ROOT / "transcripts" / "empty.jsonl").write_text("")


# ------------------------------------------------------------ NER corpus

AIRLINES = ["Japan Air", "Delta", "Endeavor", "Speed Bird", "All Nippon", "United", "American"]
UNKNOWN_AIRLINES = ["Lufthansa", "Qantas", "Air Canada"]
PHONETIC = ["Alpha", "Bravo", "Charlie", "Echo", "Golf", "Kilo", "Lima", "Sierra", "Victor"]
STATES = ["taxi", "hold", "continue", "approach", "wait", "cleared"]


class Builder:
    def __init__(self):
        self.text = ""
        self.entities = []

    def add(self, s, label=None):
        start = len(self.text)
        self.text += s
        if label:
            self.entities.append([start, len(self.text), label])
        return self


def callsign(rng, b):
    r = rng.random()
    if r < 0.15:
        b.add(f"{rng.choice(UNKNOWN_AIRLINES)} {rng.randint(10, 999)}", "CALLSIGN")
    elif r < 0.3:
        b.add(f"JA{rng.randint(100, 999)}{rng.choice('ABCK')}", "CALLSIGN")
    else:
        b.add(f"{rng.choice(AIRLINES)} {rng.randint(10, 9999)}", "CALLSIGN")


def destination(rng, b):
    r = rng.random()
    if r < 0.3:
        b.add(f"runway {rng.choice(['16L', '34R', '8 right', '27 left', '9'])}", "DESTINATION")
    elif r < 0.55:
        b.add(f"holding point {rng.choice('CDEK')}{rng.randint(1, 9)}", "DESTINATION")
    elif r < 0.7:
        b.add(f"spot {rng.randint(1, 40)}", "DESTINATION")
    elif r < 0.85:
        b.add(rng.choice(PHONETIC), "DESTINATION")
    else:
        b.add(f"apron {rng.choice('NSW')}", "DESTINATION")


def utterance(rng):
    b = Builder()
    form = rng.randrange(5)
    if form == 0:
        callsign(rng, b)
        b.add(", ").add("taxi", "ACSTATE").add(" to ")
        destination(rng, b)
        b.add(".")
    elif form == 1:
        callsign(rng, b)
        b.add(", ").add(rng.choice(["hold", "holding"]), "ACSTATE").add(" short of ")
        destination(rng, b)
        b.add(".")
    elif form == 2:
        callsign(rng, b)
        b.add(", ").add("line up", "ACSTATE").add(" and ").add("wait", "ACSTATE").add(", ")
        destination(rng, b)
        b.add(".")
    elif form == 3:
        b.add(rng.choice(["Cleared", "cleared"]), "ACSTATE").add(" to ").add("land", "ACSTATE").add(" ")
        destination(rng, b)
        b.add(", ")
        callsign(rng, b)
        b.add(".")
    else:
        callsign(rng, b)
        b.add(", ").add(rng.choice(["give way", "continue", "go"]), "ACSTATE").add(", then ")
        b.add("join", "ACSTATE").add(" ")
        destination(rng, b)
        b.add(".")
    return {"text": b.text, "entities": b.entities}


def ner():
    for name, seed, count in [("train", 11, 120), ("val", 12, 30), ("gold", 13, 60)]:
        rng = random.Random(seed)
        dump(f"ner/{name}.json", [utterance(rng) for _ in range(count)])

    gold = json.loads((ROOT / "ner" / "gold.json").read_text())
    refs = [(u, e) for u, utt in enumerate(gold) for e in range(len(utt["entities"]))]
    rng = random.Random(2024)
    rng.shuffle(refs)
    n_delete = math.floor(0.3 * len(refs) + 0.5)
    n_mislabel = math.floor(0.1 * len(refs) + 0.5)
    fate = {r: "delete" for r in refs[:n_delete]}
    fate.update({r: "mislabel" for r in refs[n_delete:n_delete + n_mislabel]})
    labels = ["CALLSIGN", "ACSTATE", "DESTINATION"]
    degraded = []
    for u, utt in enumerate(gold):
        ents = []
        for e, (s, t, label) in enumerate(utt["entities"]):
            f = fate.get((u, e))
            if f == "delete":
                continue
            if f == "mislabel":
                label = labels[(labels.index(label) + 1) % 3]
            ents.append([s, t, label])
        degraded.append({"text": utt["text"], "entities": ents})
    dump("ner/external_degraded.json", degraded)


# ------------------------------------------------------------ stats data

# Physical mean/std of taxi speed (kt) by weight class on the two Table 3 links.
WEIGHT_SPEEDS = {
    "Txy_E_004->Txy_E_003": {"SMALL": (17.0, 3.0), "LARGE": (16.0, 3.0), "HEAVY": (14.0, 3.0), "SUPER": (13.0, 3.0)},
    "Txy_E_003->Txy_E_002": {"SMALL": (15.0, 3.0), "LARGE": (15.0, 3.0), "HEAVY": (15.0, 3.0), "SUPER": (15.0, 3.0)},
}


def lognormal(rng, mean, std):
    s2 = math.log1p((std / mean) ** 2)
    return rng.lognormvariate(math.log(mean) - 0.5 * s2, math.sqrt(s2))


def stats():
    rng = random.Random(7360)
    rows = []
    t = 0.0
    for link_id, classes in WEIGHT_SPEEDS.items():
        for wc, (mean, std) in classes.items():
            for _ in range(30):
                t += 37.0
                rows.append([link_id, f"{t:.1f}", f"{lognormal(rng, mean * KT, std * KT):.4f}", wc])
    with open(ROOT / "stats" / "weight_class_samples.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["link", "timestamp", "speed", "weight_class"])
        w.writerows(rows)

    # Surface tracks along taxiway E (E_005 -> E_002), one point every 2 s.
    rng = random.Random(1511)
    path = [(0.0, -1350.0), (0.0, -1050.0), (0.0, -750.0), (0.0, -450.0)]
    link_ids = ["Txy_E_005->Txy_E_004", "Txy_E_004->Txy_E_003", "Txy_E_003->Txy_E_002"]
    points = []
    for k in range(60):
        wc = ["SMALL", "LARGE", "HEAVY", "SUPER"][k % 4]
        speeds = []
        for lid in link_ids:
            mean, std = WEIGHT_SPEEDS.get(lid, {}).get(wc, (15.0, 3.0))
            speeds.append(lognormal(rng, mean * KT, std * KT))
        start = 600.0 * k
        # Time at each node.
        node_t = [start]
        for i, v in enumerate(speeds):
            node_t.append(node_t[-1] + abs(path[i + 1][1] - path[i][1]) / v)
        # A stationary pause at the gate first.
        for j in range(3):
            points.append((start - 6.0 + 2.0 * j, f"TRK{k:03d}", 0.0, -1350.0, wc))
        t = start + 2.0
        while t < node_t[-1]:
            seg = max(i for i in range(3) if node_t[i] <= t)
            frac = (t - node_t[seg]) / (node_t[seg + 1] - node_t[seg])
            y = path[seg][1] + frac * (path[seg + 1][1] - path[seg][1])
            points.append((t, f"TRK{k:03d}", rng.gauss(0.0, 1.5), y, wc))
            t += 2.0
    points.sort(key=lambda p: (p[0], p[1]))
    with open(ROOT / "tracks" / "katl_taxiway_e.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time", "callsign", "x", "y", "weight_class"])
        for t, cs, x, y, wc in points:
            w.writerow([f"{t:.3f}", cs, f"{x:.3f}", f"{y:.3f}", wc])


def main():
    dump("graphs/haneda.json", haneda())
    dump("graphs/katl.json", katl())
    dump("graphs/synthetic_merges.json", merges())
    scenarios()
    transcripts()
    ner()
    stats()


if __name__ == "__main__":
    main()
