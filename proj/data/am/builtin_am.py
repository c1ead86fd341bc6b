#!/usr/bin/env python3
"""Dragon Hunt adaptation manager speaking the line-delimited JSON protocol.

Reads one {"type": "resolve", ...} object per line on stdin and answers each
with one {"type": "assignment", "ensembles": {...}} line on stdout.
POLICY selects which builtin behaviour this program mirrors.
"""
import json
import sys

POLICY = "reference_good"

SPAWN_COST = 5
DMG_WARRIOR = 3
DMG_FARMER = 1
ENSEMBLES = ["Farm", "Attack", "GoToCave", "SpawnFarmer", "SpawnWarrior"]


def empty():
    return {name: [] for name in ENSEMBLES}


def ids(villagers):
    return [v["id"] for v in villagers]


def respond(ensembles):
    return {"type": "assignment", "ensembles": ensembles}


def reference_good(state):
    cave = [v for v in state["villagers"] if v["location"] == "Cave"]
    idle = [v for v in state["villagers"] if v["location"] != "Cave"]
    a = empty()
    a["Attack"] = ids(cave)
    cave_damage = sum(DMG_WARRIOR if v["role"] == "Warrior" else DMG_FARMER for v in cave)
    if cave_damage >= state["dragon_hp"]:
        a["Farm"] = ids(idle)
        return respond(a)
    warriors = [v for v in idle if v["role"] == "Warrior"]
    rest = [v for v in idle if v["role"] != "Warrior"]
    if len(warriors) >= 2 or (cave and warriors):
        a["GoToCave"] = ids(warriors)
        idle = rest
    if state["wheat"] >= 2 * SPAWN_COST and len(idle) >= 2:
        a["SpawnWarrior"] = ids(idle[:2])
        idle = idle[2:]
    a["Farm"] = ids(idle)
    return respond(a)


def all_farm(state):
    a = empty()
    a["Farm"] = ids(state["villagers"])
    return a


def faulty_never_attack(state):
    return respond(all_farm(state))


def faulty_crash(state):
    raise RuntimeError("faulty_crash refuses to resolve ensembles")


def faulty_malformed(state):
    return {"type": "assignment", "ensembles": [["Farm", v["id"]] for v in state["villagers"]]}


def faulty_unknown_ensemble(state):
    a = empty()
    villagers = state["villagers"]
    if villagers:
        a["Defend"] = [villagers[0]["id"]]
        a["Farm"] = ids(villagers[1:])
    return respond(a)


def faulty_duplicate_assignment(state):
    a = all_farm(state)
    if state["villagers"]:
        a["Attack"].append(state["villagers"][0]["id"])
    return respond(a)


def faulty_unassigned(state):
    a = empty()
    a["Farm"] = ids(state["villagers"][:-1])
    return respond(a)


def faulty_cave_idle(state):
    targets = [v for v in state["villagers"] if v["role"] == "Warrior"]
    rest = [v for v in state["villagers"] if v["role"] != "Warrior"]
    a = empty()
    a["GoToCave"] = ids(targets)
    a["Farm"] = ids(rest)
    return respond(a)


def main():
    policy = globals()[POLICY]
    while True:
        line = sys.stdin.readline()
        if not line:
            break
        request = json.loads(line)
        response = policy(request["state"])
        sys.stdout.write(json.dumps(response, separators=(",", ":")) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
