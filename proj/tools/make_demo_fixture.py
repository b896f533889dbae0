#!/usr/bin/env python3
"""Writes the bundled demo instance (data/demo/orders.csv, data/demo/static.json).

Three lines, eight geometries, 43 workers on a Monday-start week. The
primary options fill every line to exactly 2400 minutes, so under the
balanced objective the schedule is unique and decomposes into six
intervals with 83 worker slots.
"""
import argparse
import csv
import json
import random
from datetime import datetime, timedelta
from pathlib import Path

REFERENCE = datetime(2023, 9, 11, 6, 0)

# geometry -> (line, setup, rate, quantity, required, due minute)
PRIMARY = {
    "g8": ("l1", 60, 5, 6900, 6, 1440),
    "g7": ("l1", 60, 5, 4500, 5, 2400),
    "g5": ("l2", 45, 4, 3660, 5, 960),
    "g4": ("l2", 40, 4, 3680, 5, 1920),
    "g6": ("l2", 30, 4, 1800, 5, 2400),
    "g2": ("l3", 15, 14, 6500, 4, 480),
    "g3": ("l3", 20, 4, 2800, 3, 1200),
    "g1": ("l3", 0, 5, 6000, 3, 2400),
}

# slower alternatives: geometry -> (line, setup, rate)
ALTERNATIVE = {
    "g2": ("l1", 30, 8),
    "g3": ("l2", 20, 2.5),
    "g4": ("l1", 40, 2.5),
    "g5": ("l3", 45, 2.5),
    "g8": ("l3", 60, 3),
    "g1": ("l2", 0, 3),
    "g6": ("l1", 30, 2),
    "g7": ("l3", 60, 3),
}

ORDERS = {"g1": "ord-101", "g2": "ord-101", "g3": "ord-102", "g4": "ord-103",
          "g5": "ord-103", "g6": "ord-104", "g7": "ord-105", "g8": "ord-105"}


def shift_of(i):
    if i <= 15:
        return "early"
    if i <= 28 or i == 43:
        return "late"
    return "night"


def due_iso(minute):
    # every due date lies inside the first working week
    return (REFERENCE + timedelta(minutes=minute)).strftime("%Y-%m-%dT%H:%M")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "demo"))
    ap.add_argument("--seed", type=int, default=2023)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    with open(out / "orders.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["order_id", "geometry_id", "quantity", "due_date", "priority"])
        for g in sorted(PRIMARY, key=lambda k: int(k[1:])):
            line, setup, rate, qty, req, due = PRIMARY[g]
            w.writerow([ORDERS[g], g, qty, due_iso(due), 0])

    options = []
    for g in sorted(PRIMARY, key=lambda k: int(k[1:])):
        line, setup, rate, qty, req, due = PRIMARY[g]
        options.append({"geometry_id": g, "line_id": line, "setup_minutes": setup,
                        "rate": rate, "required_workers": req})
        aline, asetup, arate = ALTERNATIVE[g]
        options.append({"geometry_id": g, "line_id": aline, "setup_minutes": asetup,
                        "rate": arate, "required_workers": req})

    workers = [{"id": f"w{i:02d}", "shifts": [shift_of(i)]} for i in range(1, 44)]

    def unit():
        return round(rng.random(), 2)

    resilience = [{"worker_id": wk["id"], "rho": unit()} for wk in workers]
    rho_of = {r["worker_id"]: r for r in resilience}
    rho_of["w01"]["rho"] = 0.73

    factors = []
    for wk in workers:
        for opt in options:
            key = (wk["id"], opt["line_id"], opt["geometry_id"])
            mu = 1
            # slack exists only where the early crew outnumbers the slots
            if key in {("w02", "l3", "g1"), ("w03", "l3", "g1")}:
                mu = 0
            f = {"worker_id": wk["id"], "line_id": opt["line_id"], "geometry_id": opt["geometry_id"],
                 "mu": mu, "pi": unit(), "xi": unit()}
            if key == ("w01", "l2", "g5"):
                f.update(pi=0.84, xi=0.83, rho=0.79)
            if key == ("w01", "l1", "g8"):
                f.update(pi=0.22, xi=0.33)
            factors.append(f)

    static = {
        "format": "fairplan-static",
        "version": 1,
        "reference": REFERENCE.strftime("%Y-%m-%dT%H:%M"),
        "horizon_days": 5,
        "lines": [{"id": l} for l in ("l1", "l2", "l3")],
        "options": options,
        "workers": workers,
        "factors": factors,
        "resilience": resilience,
    }
    with open(out / "static.json", "w") as fh:
        json.dump(static, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
