#!/usr/bin/env python3
"""Regenerates the larger scenario files under scenarios/.

    python3 tools/gen_scenarios.py scenarios/
"""
import random
import sys
from pathlib import Path

import yaml


def pair_market(rng, brokers, pairs, start, end, granularity, late=()):
    participants, listings, queries = [], [], []
    for i in range(pairs):
        b = brokers[i % len(brokers)]
        bx, by = b["location"]
        p, c = f"prov-{i:02d}", f"cons-{i:02d}"
        participants.append({"id": p, "role": "provider", "balance": 50,
                             "location": [bx + rng.randint(-3, 3), by + rng.randint(-3, 3)]})
        participants.append({"id": c, "role": "consumer", "balance": 50,
                             "location": [bx + rng.randint(-3, 3), by + rng.randint(-3, 3)]})
        cost = rng.choice([0.01, 0.02, 0.03, 0.05])
        at = late[i] if i < len(late) else 0
        listings.append({"id": f"L{i:02d}", "provider": p, "device_id": i + 1, "data_type": f"sensor-{i:02d}",
                         "unit_cost": cost, "sampling_frequency": "30min", "duration_offered": "30d", "at": at})
        queries.append({"id": f"Q{i:02d}", "consumer": c, "data_type": f"sensor-{i:02d}",
                        "budget": round(cost + rng.choice([0.0, 0.01, 0.02]), 2), "frequency_required": "30min",
                        "start": start, "end": end, "granularity": granularity, "at": at})
    return participants, listings, queries


def write(path, doc, header):
    with open(path, "w") as f:
        f.write(header)
        yaml.safe_dump(doc, f, sort_keys=False, default_flow_style=None, width=120)


def failover(out):
    rng = random.Random(5)
    brokers = [{"id": 1, "location": [0, 0]}, {"id": 2, "location": [50, 0]}, {"id": 3, "location": [100, 0]}]
    # Every third pair lives near broker 2 and half of those submit after the crash.
    late = [0] * 12
    for i in (1, 7):
        late[i] = 200
    parts, lists, qs = pair_market(rng, brokers, 12, 1440, 2880, 10, late)
    doc = {"seed": 11, "tick_minutes": 1, "duration": "3d", "hop_delay": 1, "brokers": brokers,
           "participants": parts, "listings": lists, "queries": qs,
           "faults": [{"kind": "broker_crash", "target": "2", "at": 100}]}
    write(out / "failover.yaml", doc, "# Three brokers; broker 2 crashes at tick 100, before two of its\n"
                                      "# participants submit their listing and query.\n")


def mixed(out):
    rng = random.Random(9)
    brokers = [{"id": 1, "location": [0, 0]}, {"id": 2, "location": [40, 0]}, {"id": 3, "location": [80, 0]}]
    parts, lists, qs = pair_market(rng, brokers, 50, 1440, 2880, 10)
    faults = []
    for i, w in ((3, 1), (8, 2), (13, 4), (21, 3), (34, 5)):
        faults.append({"kind": "counter_tamper", "target": f"cons-{i:02d}", "at": 0, "params": {"window": w}})
    for i, w in ((5, 2), (17, 1), (29, 3)):
        faults.append({"kind": "counter_tamper", "target": f"prov-{i:02d}", "at": 0,
                       "params": {"window": w, "delta": 2}})
    for i, w in ((10, 1), (25, 3), (41, 2)):
        faults.append({"kind": "payment_refusal", "target": f"cons-{i:02d}", "at": 0, "params": {"window": w}})
    for i, at in ((15, 1700), (33, 2000), (46, 2500)):
        faults.append({"kind": "delivery_stall", "target": f"prov-{i:02d}", "at": at})
    faults.append({"kind": "eavesdrop", "target": "cons-07", "at": 1500})
    faults.append({"kind": "broker_crash", "target": "3", "at": 600})
    faults.append({"kind": "broker_recover", "target": "3", "at": 2000})
    rotations = [{"participant": f"prov-{i:02d}", "at": at} for i, at in ((2, 50), (19, 1800), (38, 2200))]
    doc = {"seed": 77, "tick_minutes": 1, "duration": "3d", "hop_delay": 1, "brokers": brokers,
           "participants": parts, "listings": lists, "queries": qs, "faults": faults, "rotations": rotations}
    write(out / "mixed_faults.yaml", doc, "# Fifty one-day subscriptions across three brokers with counter\n"
                                          "# tampering, refused payments, stalled deliveries, an eavesdropper,\n"
                                          "# key rotations and a broker crash and recovery.\n")


def collusion(out):
    rng = random.Random(3)
    brokers = [{"id": 1, "location": [0, 0]}, {"id": 2, "location": [30, 0]}, {"id": 3, "location": [60, 0]}]
    parts, lists, qs = [], [], []
    for i in range(6):
        b = brokers[i % 3]["location"]
        parts.append({"id": f"prov-{i}", "role": "provider", "balance": 50, "location": [b[0] + 1, b[1] + 1]})
        lists.append({"id": f"L{i}", "provider": f"prov-{i}", "device_id": i + 1, "data_type": "air-quality",
                      "unit_cost": round(0.01 + 0.005 * i, 3), "sampling_frequency": "30min",
                      "duration_offered": "30d", "at": 0 if i < 4 else 300})
    for j in range(6):
        b = brokers[j % 3]["location"]
        parts.append({"id": f"cons-{j}", "role": "consumer", "balance": 50, "location": [b[0] - 1, b[1]]})
        qs.append({"id": f"Q{j}", "consumer": f"cons-{j}", "data_type": "air-quality", "budget": 0.05,
                   "frequency_required": "30min", "period": "1d", "granularity": 12,
                   "at": [0, 0, 0, 120, 240, 360][j]})
    rng.shuffle(parts)
    doc = {"seed": 23, "tick_minutes": 1, "duration": "3d", "hop_delay": 2, "brokers": brokers,
           "participants": parts, "listings": lists, "queries": qs,
           "faults": [{"kind": "broker_collusion_bias", "target": "1", "at": 0}]}
    write(out / "collusion.yaml", doc, "# Broker 1 withholds the cheapest offer from every match result it\n"
                                       "# publishes; its peers recompute each round from the shared book.\n")


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "scenarios")
    out.mkdir(parents=True, exist_ok=True)
    failover(out)
    mixed(out)
    collusion(out)
