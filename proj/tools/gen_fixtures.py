#!/usr/bin/env python3
"""Regenerates everything under fixtures/.

Deterministic: every random draw comes from a seeded random.Random. Telemetry
is synthetic; the first two rows and the final row of the shutdown recording
carry the simulator sample values, and the interface graph, procedure and
checklist are transcribed from the case-study tables.

    python3 tools/gen_fixtures.py [--out fixtures]
"""

import argparse
import json
import math
import random
from pathlib import Path

TICK_S = 0.01
FRAME_STEP = 20
FIRST_TICK = 17
WINDOW = 50

# ---------------------------------------------------------------- interface

# id, label, kind, coords or None, parent
ELEMENTS = [
    ("procedure", "Procedure", "button", (198, 95), None),
    ("coordination_control", "Coordination Control", "panel", (217, 226), "procedure"),
    ("reactor_power_control", "Reactor Power Control", "panel", (217, 180), "procedure"),
    ("reactor_overview", "Reactor Overview", "panel", (209, 155), "procedure"),
    ("thermal_power_setpoint", "Thermal Power Setpoint", "button", (393, 561), "coordination_control"),
    ("parameter_tuning", "Parameter Tuning", "button", None, "thermal_power_setpoint"),
    ("parameter_tuning_end", "Parameter Tuning End", "button", None, "parameter_tuning"),
    ("rod_insertion", "Rod Insertion", "button", (1576, 511), "reactor_power_control"),
    ("steam_temperature", "Steam Temperature", "indicator", (1661, 631), "reactor_overview"),
    ("steam_pressure", "Steam Pressure", "indicator", (1839, 525), "reactor_overview"),
    ("feedwater_flow", "Feedwater Flow", "indicator", (1321, 506), "reactor_overview"),
    ("screen_lookup", "Screen Lookup", "lookup", (1390, 87), None),
    ("reactor", "Reactor", "panel", (1393, 126), "screen_lookup"),
    ("conventional_island", "Conventional Island", "panel", (1341, 237), "reactor"),
    ("i2_startup_shutdown", "I#2# Startup/Shutdown System", "screen", (363, 347), "conventional_island"),
    ("i2_main_steam", "I#2# Main Steam System", "screen", (1214, 302), "conventional_island"),
    ("i2_reactor_main_steam", "I#2# Reactor Main Steam System", "screen", (1214, 302), "conventional_island"),
    ("LBH0AA101", "LBH0AA101", "valve_control", (484, 333), "i2_startup_shutdown"),
    ("LBH0AA201", "LBH0AA201", "valve_control", (574, 327), "i2_startup_shutdown"),
    ("LBH0AA102", "LBH0AA102", "valve_control", (761, 326), "i2_startup_shutdown"),
    ("LBH20AA101", "LBH20AA101", "valve_control", (1383, 324), "i2_startup_shutdown"),
    ("LBH0AA103", "LBH0AA103", "valve_control", (1025, 234), "i2_startup_shutdown"),
    ("LBH20AA101_2", "LBH20AA101", "valve_control", (1157, 570), "i2_startup_shutdown"),
    ("LBH30AA201", "LBH30AA201", "valve_control", (1273, 371), "i2_startup_shutdown"),
    ("LBH50AA101", "LBH50AA101", "valve_control", (1508, 577), "i2_startup_shutdown"),
    ("LBH07AA101", "LBH07AA101", "valve_control", (490, 957), "i2_startup_shutdown"),
    ("LBH07AA102", "LBH07AA102", "valve_control", (582, 950), "i2_startup_shutdown"),
    ("LBH08AA101", "LBH08AA101", "valve_control", (378, 442), "i2_startup_shutdown"),
    ("LBH08AA102", "LBH08AA102", "valve_control", (1383, 439), "i2_startup_shutdown"),
    ("LBF20AA201", "LBF20AA201", "valve_control", (1190, 304), "i2_main_steam"),
    ("LBF20AA101", "LBF20AA101", "valve_control", (1183, 310), "i2_main_steam"),
    ("LBA20AA101", "LBA20AA101", "valve_control", (1398, 131), "i2_main_steam"),
    ("LBA20AA102", "LBA20AA102", "valve_control", (1331, 236), "i2_main_steam"),
    ("LBF20AA101_2", "LBF20AA101", "valve_control", (1190, 304), "i2_reactor_main_steam"),
    ("LBF20AA202", "LBF20AA202", "valve_control", (647, 458), "i2_reactor_main_steam"),
    ("LBF20AA102", "LBF20AA102", "valve_control", (1199, 599), "i2_reactor_main_steam"),
    ("top_left_toggle", "Top-Left Toggle", "toggle", (143, 37), None),
    ("i3_startup_shutdown", "I#3# Startup/Shutdown System", "screen", (363, 347), "top_left_toggle"),
    ("LBH10AA201", "LBH10AA201", "valve_control", (574, 327), "i3_startup_shutdown"),
    ("LBH09AA101", "LBH09AA101", "valve_control", (1025, 234), "i3_startup_shutdown"),
    ("LBH20AA102", "LBH20AA102", "valve_control", (761, 326), "i3_startup_shutdown"),
    ("LBH20AA201", "LBH20AA201", "valve_control", (1383, 324), "i3_startup_shutdown"),
]

# Operational paths as element ids, one per procedure step.
PATHS = {
    "FE1": ["procedure", "coordination_control", "thermal_power_setpoint", "parameter_tuning", "parameter_tuning_end"],
    "FE2": ["procedure", "reactor_power_control", "rod_insertion"],
    "FE3": ["procedure", "reactor_overview", "steam_temperature", "steam_pressure", "feedwater_flow"],
    "SN1": ["screen_lookup", "reactor", "conventional_island", "i2_startup_shutdown", "LBH0AA101", "LBH0AA201",
            "LBH0AA102", "LBH20AA101", "LBH0AA103", "LBH20AA101_2", "LBH30AA201", "LBH50AA101"],
    "SN2": ["screen_lookup", "reactor", "conventional_island", "i2_main_steam", "LBF20AA201", "LBF20AA101",
            "LBA20AA101", "LBA20AA102"],
    "SN3": ["screen_lookup", "reactor", "conventional_island", "i2_startup_shutdown", "LBH07AA101", "LBH07AA102",
            "LBH08AA101", "LBH08AA102"],
    "SN4": ["screen_lookup", "reactor", "conventional_island", "i2_main_steam", "LBF20AA201"],
    "SN5": ["screen_lookup", "reactor", "conventional_island", "i2_reactor_main_steam", "LBA20AA101", "LBA20AA102",
            "LBF20AA101_2", "LBF20AA202"],
    "TLT1": ["top_left_toggle", "i3_startup_shutdown", "LBH0AA101", "LBH10AA201", "LBH09AA101", "LBH20AA102",
             "LBH20AA201"],
    "TLT2": ["top_left_toggle", "i2_reactor_main_steam", "LBF20AA102", "LBF20AA202"],
}

# Targets written into the procedure; compilation fills the hops between them.
STEPS = [
    ("FE1", "flowchart_execution", "Adjust the thermal power setpoint to the shutdown value",
     ["procedure", "thermal_power_setpoint", "parameter_tuning_end"]),
    ("FE2", "flowchart_execution", "Insert control rods", ["procedure", "rod_insertion"]),
    ("FE3", "flowchart_execution", "Check steam temperature, steam pressure and feedwater flow",
     ["procedure", "steam_temperature", "steam_pressure", "feedwater_flow"]),
    ("SN1", "screen_navigation", "Align the moisture separator inlet and outlet valves",
     ["screen_lookup", "LBH0AA101", "LBH0AA201", "LBH0AA102", "LBH20AA101", "LBH0AA103", "LBH20AA101_2",
      "LBH30AA201", "LBH50AA101"]),
    ("SN2", "screen_navigation", "Align the main steam bypass and isolation valves",
     ["screen_lookup", "i2_main_steam", "LBF20AA201", "LBF20AA101", "LBA20AA101", "LBA20AA102"]),
    ("SN3", "screen_navigation", "Check the startup/shutdown drain valves",
     ["screen_lookup", "i2_startup_shutdown", "LBH07AA101", "LBH07AA102", "LBH08AA101", "LBH08AA102"]),
    ("SN4", "screen_navigation", "Set the turbine bypass valve to automatic",
     ["screen_lookup", "i2_main_steam", "LBF20AA201"]),
    ("SN5", "screen_navigation", "Confirm the reactor main steam isolation valves",
     ["screen_lookup", "i2_reactor_main_steam", "LBA20AA101", "LBA20AA102", "LBF20AA101_2", "LBF20AA202"]),
    ("TLT1", "top_left_toggle", "Switch to unit 3 and align the moisture separator valves",
     ["top_left_toggle", "LBH0AA101", "LBH10AA201", "LBH09AA101", "LBH20AA102", "LBH20AA201"]),
    ("TLT2", "top_left_toggle", "Switch to the reactor main steam system and check the drain valves",
     ["top_left_toggle", "i2_reactor_main_steam", "LBF20AA102", "LBF20AA202"]),
]

CHECKLIST = [
    ("LBH10AA101", "Moisture Separator Inlet Isolation Valve 1", "Closed"),
    ("LBH10AA201", "Moisture Separator Inlet Regulating Valve", "Open"),
    ("LBH10AA102", "Moisture Separator Inlet Isolation Valve 2", "Closed"),
    ("LBH20AA101", "Moisture Separator Outlet Isolation Valve", "Closed"),
    ("LBH09AA101", "Moisture Separator Bypass Isolation Valve", "Open"),
    ("LBH30AA101", "Moisture Separator Drain Isolation Valve", "Open"),
    ("LBH30AA201", "Moisture Separator Drain Regulating Valve", "Open"),
    ("LBH50AA101", "Moisture Separator Drain to Condenser Isolation Valve", "Open"),
    ("LBF20AA201", "Reactor Turbine Bypass Valve", "Auto"),
    ("LBF20AA101", "Reactor Main Steam to Bypass Motorized Isolation Valve", "Open"),
    ("LBA20AA101", "Reactor Main Steam Motorized Isolation Valve 1", "Open"),
    ("LBA20AA102", "Reactor Main Steam Motorized Isolation Valve 2", "Open"),
]


def edge_action(src_kind, dst_kind):
    if src_kind == "lookup":
        return "lookup"
    if src_kind == "toggle":
        return "toggle"
    if dst_kind in ("valve_control", "button"):
        return "click"
    return "navigate"


def build_graph():
    kinds = {e[0]: e[2] for e in ELEMENTS}
    parents = {e[0]: e[4] for e in ELEMENTS}

    def layer(eid):
        depth = 0
        while parents[eid] is not None:
            eid = parents[eid]
            depth += 1
        return depth

    elements = []
    for eid, label, kind, coords, parent in ELEMENTS:
        elements.append({
            "id": eid, "label": label, "kind": kind,
            "x": coords[0] if coords else None, "y": coords[1] if coords else None,
            "layer": layer(eid), "parent": parent,
        })
    edges, seen = [], set()
    for path in PATHS.values():
        for a, b in zip(path, path[1:]):
            if (a, b) in seen:
                continue
            seen.add((a, b))
            edges.append({"from": a, "to": b, "action": edge_action(kinds[a], kinds[b])})
    return {"elements": elements, "edges": edges}


def procedure_text():
    lines = ["title: Reactor Shutdown",
             "# Disconnection of Generator to 6kV 1B Bus bar: shutdown response", ""]
    for sid, kind, text, targets in STEPS:
        lines.append(f"[STEP {sid} {kind}] {text}")
        lines.extend(f"target: {t}" for t in targets)
        lines.append("")
    lines.append("[STEP CHK checklist] Verify the shutdown loop valve line-up")
    lines.extend(f"expect: {code}={state}" for code, _, state in CHECKLIST)
    lines.append("")
    return "\n".join(lines)


def checklist_csv():
    rows = ["index,valve_code,valve_name,expected"]
    rows += [f"{i},{code},{name},{state}" for i, (code, name, state) in enumerate(CHECKLIST, start=1)]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------- telemetry

# name, nominal value, noise sigma
PARAMETERS = [
    ("Nuclear Power", 183.60, 0.004),
    ("Thermal Power #1", 198.30, 0.05),
    ("Thermal Power #2", 198.10, 0.05),
    ("Helium Blower Speed #1", 3823.0, 2.5),
    ("Helium Blower Speed #2", 3821.0, 2.5),
    ("Hot Helium Temp #1", 542.40, 0.02),
    ("Hot Helium Temp #2", 542.276, 0.02),
    ("Cold Helium Temp #1", 251.40, 0.01),
    ("Cold Helium Temp #2", 251.355, 0.01),
    ("Primary Pressure #1", 7.000, 0.002),
    ("Primary Pressure #2", 7.001, 0.002),
    ("Main Steam Pressure #1", 13.24, 0.01),
    ("Main Steam Pressure #2", 13.25, 0.01),
    ("Main Steam Temp #1", 566.0, 0.15),
    ("Main Steam Temp #2", 565.8, 0.15),
    ("Feedwater Flow #1", 87.5, 0.3),
    ("Feedwater Flow #2", 87.3, 0.3),
    ("Feedwater Temp #1", 205.0, 0.1),
    ("Feedwater Temp #2", 205.1, 0.1),
    ("SG Outlet Temp #1", 567.0, 0.15),
    ("SG Outlet Temp #2", 566.9, 0.15),
    ("Rod Position #1", 180.0, 0.05),
    ("Rod Position #2", 180.0, 0.05),
    ("Generator Power", 210.0, 0.4),
    ("Generator Frequency", 50.00, 0.005),
    ("Turbine Speed", 3000.0, 0.8),
    ("6kV 1A Bus Voltage", 6.30, 0.005),
    ("6kV 1B Bus Voltage", 6.30, 0.005),
    ("Deaerator Level", 1850.0, 1.0),
    ("Deaerator Pressure", 0.95, 0.002),
    ("Condenser Vacuum", -95.0, 0.05),
    ("Bypass Valve Position", 0.0, 0.05),
    ("Condenser Level", 704.22, 0.03),
]
NAMES = [p[0] for p in PARAMETERS]
assert len(NAMES) == 33

# Columns carried by the sample rows of the simulator table.
SAMPLE_COLUMNS = ["Nuclear Power", "Thermal Power #1", "Helium Blower Speed #1", "Hot Helium Temp #2",
                  "Cold Helium Temp #2", "Condenser Level"]
SAMPLE_ROWS = {
    17: [183.5995, 0.0, 3826.837, 542.2744, 251.3571, 704.1935],
    37: [183.6040, 198.2936, 3820.901, 542.2758, 251.3527, 704.2556],
}
FINAL_TICK = 10610
FINAL_ROW = [183.0486, 199.7107, 3800.0, 519.5561, 248.2146, 603.6227]

# Event effects: parameter -> (kind, magnitude, seconds). "step" settles to
# nominal + magnitude with a first-order lag; "ramp" drifts by magnitude
# over the given seconds and keeps going at that rate.
EVENTS = {
    "EV-GEN-DISC": {
        "name": "Disconnection of Generator to 6kV 1B Bus bar",
        "effects": {
            "Generator Power": ("step", -210.0, 1.0),
            "6kV 1B Bus Voltage": ("step", -6.3, 0.3),
            "Turbine Speed": ("step", 60.0, 2.0),
            "Generator Frequency": ("step", 0.8, 2.0),
            "Bypass Valve Position": ("step", 45.0, 3.0),
        },
    },
    "EV-FW-LOSS": {
        "name": "Loss of Main Feedwater Pump",
        "effects": {
            "Feedwater Flow #1": ("step", -70.0, 2.0),
            "Feedwater Flow #2": ("step", -70.0, 2.0),
            "Deaerator Level": ("step", 60.0, 4.0),
            "SG Outlet Temp #1": ("step", 12.0, 4.0),
            "SG Outlet Temp #2": ("step", 12.0, 4.0),
        },
    },
    "EV-HB-TRIP": {
        "name": "Helium Blower #2 Trip",
        "effects": {
            "Helium Blower Speed #2": ("step", -3821.0, 3.0),
            "Hot Helium Temp #1": ("step", 15.0, 5.0),
            "Cold Helium Temp #2": ("step", 20.0, 5.0),
            "Thermal Power #2": ("step", -60.0, 3.0),
            "Primary Pressure #2": ("step", -0.3, 4.0),
        },
    },
}


def effect_at(kind, magnitude, tau_s, dt_s):
    if dt_s < 0:
        return 0.0
    if kind == "step":
        return magnitude * (1.0 - math.exp(-dt_s / tau_s))
    if kind == "ramp":
        return magnitude * dt_s / tau_s
    raise ValueError(kind)


SHUTDOWN_ONSET = 3017
DRIFT_S = (FINAL_TICK - SHUTDOWN_ONSET) * TICK_S
for _name, _start, _end in zip(SAMPLE_COLUMNS, SAMPLE_ROWS[37], FINAL_ROW):
    EVENTS["EV-GEN-DISC"]["effects"][_name] = ("ramp", _end - _start, DRIFT_S)


def frames_for(rng, n_frames, event=None, onset=None, first_tick=FIRST_TICK):
    ticks = [first_tick + FRAME_STEP * i for i in range(n_frames)]
    rows = []
    for t in ticks:
        row = []
        for name, nominal, sigma in PARAMETERS:
            v = nominal + rng.gauss(0.0, sigma)
            if event is not None:
                eff = EVENTS[event]["effects"].get(name)
                if eff:
                    v += effect_at(eff[0], eff[1], eff[2], (t - onset) * TICK_S)
            row.append(v)
        rows.append(row)
    return ticks, rows


def shutdown_recording(rng):
    """Generator-disconnect recording whose sample rows match the simulator table."""
    onset = SHUTDOWN_ONSET
    last_regular = FINAL_TICK - 13
    n = (last_regular - FIRST_TICK) // FRAME_STEP + 1
    ticks, rows = frames_for(rng, n, "EV-GEN-DISC", onset)
    col = {name: i for i, name in enumerate(NAMES)}
    for t, values in SAMPLE_ROWS.items():
        k = ticks.index(t)
        for name, v in zip(SAMPLE_COLUMNS, values):
            rows[k][col[name]] = v
    final = [rows[-1][i] for i in range(len(NAMES))]
    for name, v in zip(SAMPLE_COLUMNS, FINAL_ROW):
        final[col[name]] = v
    ticks.append(FINAL_TICK)
    rows.append(final)
    return ticks, rows, onset


def fmt(v):
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


def csv_text(ticks, rows):
    out = ["TIME," + ",".join(NAMES)]
    for t, row in zip(ticks, rows):
        out.append(str(t) + "," + ",".join(fmt(v) for v in row))
    return "\n".join(out) + "\n"


def rounded(rows):
    return [[float(fmt(v)) for v in row] for row in rows]


# ---------------------------------------------------------------- features

def ls_slope(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


def raw_window(ticks, rows, end):
    """(means, slopes) of the WINDOW frames ending at index `end` inclusive."""
    lo = end - WINDOW + 1
    xs = [(ticks[i] - ticks[lo]) * TICK_S for i in range(lo, end + 1)]
    means, slopes = [], []
    for p in range(len(NAMES)):
        ys = [rows[i][p] for i in range(lo, end + 1)]
        means.append(sum(ys) / len(ys))
        slopes.append(ls_slope(xs, ys))
    return means, slopes


def features(calibration, ticks, rows, end):
    means, slopes = raw_window(ticks, rows, end)
    out = []
    for p, c in enumerate(calibration):
        out.append((means[p] - c["mean"]) / c["std"])
        out.append((slopes[p] - c["slope_mean"]) / c["slope_std"])
    return out


def dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def calibrate(nominal_runs):
    calibration = []
    for p, name in enumerate(NAMES):
        values = [row[p] for _, rows in nominal_runs for row in rows]
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
        slopes = []
        for ticks, rows in nominal_runs:
            for end in range(WINDOW - 1, len(rows), 5):
                slopes.append(raw_window(ticks, rows, end)[1][p])
        smean = sum(slopes) / len(slopes)
        sstd = math.sqrt(sum((s - smean) ** 2 for s in slopes) / (len(slopes) - 1))
        calibration.append({"name": name, "mean": round(mean, 6), "std": round(std, 6),
                            "slope_mean": round(smean, 6), "slope_std": round(sstd, 6)})
    return calibration


def first_detection(calibration, signatures, ticks, rows):
    for end in range(WINDOW - 1, len(rows)):
        f = features(calibration, ticks, rows, end)
        best = None
        for s in sorted(signatures, key=lambda s: s["event_id"]):
            d = dist(f, s["centroid"])
            if best is None or d < best[0]:
                best = (d, s)
        if best[0] <= best[1]["threshold"]:
            return best[1]["event_id"], ticks[end]
    return None, None


# ---------------------------------------------------------------- configs

TIMING_CONF = """# Primitive operator durations in seconds.
visual_search = 1.10
click = 0.20
read_value = 1.35
memory_retrieve = 1.20
mental_prep = 1.35

# Pointing: a + b * log2(distance / width + 1)
point_a = 0.1
point_b = 0.15
target_width_px = 30
home_x = 960
home_y = 540

# Lognormal shape of the required-time distribution.
sigma = 0.28
"""

PIF_MODEL = {
    "pifs": ["information_completeness", "hsi_complexity", "time_pressure", "task_complexity", "workload"],
    "default_multipliers": {"moderate": 3, "high": 10},
    "functions": {
        "detection": {"base_hep": 1e-3},
        "understanding": {"base_hep": 2e-3},
        "decision_making": {"base_hep": 2e-3},
        "action_execution": {"base_hep": 1e-3},
    },
    "assessor": {
        "hsi_moderate_nodes": 4, "hsi_high_nodes": 8,
        "workload_moderate": 40, "workload_high": 50,
        "time_pressure_moderate": 0.5, "time_pressure_high": 0.8,
        "flowchart_moderate_nodes": 4, "flowchart_high_nodes": 8,
        "deadline_ms": 150,
    },
}


def noisy_or_rows(leak, effects):
    """ActionRisk CPT rows over (TimePressure, CognitiveLoad, PIFSeverity, Confusion), last parent fastest."""
    rows = []
    for tp in ("low", "moderate", "high"):
        for cl in ("low", "high"):
            for ps in ("nominal", "moderate", "high"):
                for cf in ("false", "true"):
                    survive = 1.0 - leak
                    for parent, state in (("TimePressure", tp), ("CognitiveLoad", cl), ("PIFSeverity", ps),
                                          ("Confusion", cf)):
                        survive *= 1.0 - effects[parent].get(state, 0.0)
                    high = round(1.0 - survive, 12)
                    rows.append([round(1.0 - high, 12), high])
    return rows


GATE = {
    "nodes": [
        {"name": "TimePressure", "states": ["low", "moderate", "high"], "cpt": [[0.90, 0.08, 0.02]]},
        {"name": "CognitiveLoad", "states": ["low", "high"], "cpt": [[0.85, 0.15]]},
        {"name": "PIFSeverity", "states": ["nominal", "moderate", "high"], "cpt": [[0.80, 0.15, 0.05]]},
        {"name": "Confusion", "states": ["false", "true"], "cpt": [[0.95, 0.05]]},
        {"name": "ActionRisk", "states": ["low", "high"],
         "parents": ["TimePressure", "CognitiveLoad", "PIFSeverity", "Confusion"],
         "cpt": noisy_or_rows(2e-4, {
             "TimePressure": {"moderate": 0.01, "high": 0.2},
             "CognitiveLoad": {"high": 0.01},
             "PIFSeverity": {"moderate": 0.02, "high": 0.15},
             "Confusion": {"true": 0.3},
         })},
    ],
    "thresholds": {"allow_below": 1e-3, "suggest_below": 5e-2},
    "evidence": {"p_t_moderate": 0.01, "p_t_high": 0.1, "p_c_moderate": 0.01, "p_c_high": 0.05},
}


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_json(path, doc):
    write(path, json.dumps(doc, indent=2) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    args = ap.parse_args()
    out = Path(args.out)
    shutdown = out / "shutdown"
    corpus = out / "telemetry"

    write_json(shutdown / "iekg.json", build_graph())
    write(shutdown / "reactor_shutdown.proc", procedure_text())
    write(shutdown / "checklist.csv", checklist_csv())
    write(shutdown / "timing.conf", TIMING_CONF)
    write_json(shutdown / "pif_model.json", PIF_MODEL)
    write_json(shutdown / "gate.json", GATE)
    write_json(shutdown / "expected_paths.json", PATHS)
    write_json(shutdown / "approve_all.json", [{"ordinal": "*", "decision": "approved"}])
    write_json(shutdown / "reject_all.json", [{"ordinal": "*", "decision": "rejected"}])
    write_json(shutdown / "approve_late.json", [{"ordinal": 1, "decision": "approved", "delay_ticks": 700},
                                                {"ordinal": "*", "decision": "approved"}])

    # Fit on training runs that are not written out.
    rng = random.Random(20240611)
    nominal_train = []
    for _ in range(4):
        ticks, rows = frames_for(rng, 240)
        nominal_train.append((ticks, rounded(rows)))
    calibration = calibrate(nominal_train)

    signatures = []
    for event_id in sorted(EVENTS):
        points = []
        for k in range(3):
            onset = 1017 + 400 * k
            ticks, rows = frames_for(rng, 200, event_id, onset)
            rows = rounded(rows)
            # Windows opening 1 to 5 s after onset.
            for end in range(WINDOW - 1, len(rows)):
                start = ticks[end - WINDOW + 1]
                if onset + 100 <= start <= onset + 500:
                    points.append(features(calibration, ticks, rows, end))
        dim = len(points[0])
        centroid = [sum(p[i] for p in points) / len(points) for i in range(dim)]
        spread = max(dist(p, centroid) for p in points)
        signatures.append({"event_id": event_id, "name": EVENTS[event_id]["name"],
                           "centroid": [round(c, 6) for c in centroid], "spread": spread})

    nominal_points = [features(calibration, ticks, rows, end)
                      for ticks, rows in nominal_train for end in range(WINDOW - 1, len(rows), 5)]
    min_gap = min(dist(a["centroid"], b["centroid"]) for a in signatures for b in signatures if a is not b)
    for s in signatures:
        clearance = min(dist(s["centroid"], p) for p in nominal_points)
        s["threshold"] = round(min(max(3.0 * s["spread"], 25.0), 0.4 * min_gap, 0.4 * clearance), 6)
        del s["spread"]
    write_json(shutdown / "signatures.json", {"signatures": signatures})

    scenario = {
        "id": "reactor-shutdown",
        "graph": "iekg.json",
        "timing": "timing.conf",
        "pif_model": "pif_model.json",
        "gate": "gate.json",
        "signatures": "signatures.json",
        "procedures": {"EV-GEN-DISC": "reactor_shutdown.proc"},
        "t_avail": {"default_s": 60, "steps": {"SN1": 30}},
        "thresholds": {"allow_below": 1e-3, "suggest_below": 5e-2},
        "approval_expiry_ticks": 600,
        "auto_execute_allowed": True,
        "perception": {"window_len": WINDOW, "calibration": calibration},
    }
    write_json(shutdown / "scenario.json", scenario)

    # Shutdown recording.
    ticks, rows, _ = shutdown_recording(rng)
    text = csv_text(ticks, rows)
    write(shutdown / "telemetry_shutdown.csv", text)
    label, at = first_detection(calibration, signatures, ticks, rounded(rows))
    assert label == "EV-GEN-DISC", label
    print(f"shutdown recording: {len(ticks)} frames, detected {label} at tick {at}")

    # Held-out evaluation corpus.
    labels = {}
    for k in range(2):
        ticks, rows = frames_for(rng, 220)
        name = f"nominal_{k + 1}.csv"
        write(corpus / name, csv_text(ticks, rows))
        labels[name] = None
    for event_id in sorted(EVENTS):
        for k in range(2):
            onset = 1217 + 600 * k
            ticks, rows = frames_for(rng, 220, event_id, onset)
            name = f"{event_id.lower()}_{k + 1}.csv"
            write(corpus / name, csv_text(ticks, rows))
            labels[name] = event_id
    write_json(corpus / "labels.json", labels)

    for name, expected in labels.items():
        from_disk = (corpus / name).read_text().splitlines()[1:]
        ticks = [int(line.split(",")[0]) for line in from_disk]
        rows = [[float(v) for v in line.split(",")[1:]] for line in from_disk]
        label, at = first_detection(calibration, signatures, ticks, rows)
        assert label == expected, (name, label, expected)
        print(f"{name}: {label} at {at}")
    print(f"thresholds: {[s['threshold'] for s in signatures]}, min centroid gap {min_gap:.1f}")


if __name__ == "__main__":
    main()
