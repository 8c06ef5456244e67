#!/usr/bin/env python3
"""Write the two indoor demo environments to crates/core/data/maps/.

For each environment: the landmark database, a semantic map (landmark nodes
plus unlabeled waypoints) and the demo commands with gold formulas and the
expected planner outcome.
"""

import json
from pathlib import Path

from gen_seed_corpus import formula


def f(fam, *props, n=None):
    # single-landmark families never read the second slot
    return formula(fam, n if n is not None else len(props), list(props) + ["_"] * 5)


def both(*items):
    out = items[-1]
    for x in reversed(items[:-1]):
        out = f"& {x} {out}"
    return out


def never(*props):
    return f("global_avoidance", *props)


def upper(p, n):
    return f("upper_restricted_avoidance", p, n=n)


def lower(p, n):
    return f("lower_restricted_avoidance", p, n=n)


def exact(p, n):
    return f("exact_restricted_avoidance", p, n=n)


def not_before(later, earlier):
    return f"U ! {later} {earlier}"


ENV1_DB = {
    "bookshelf": {"material": "wood", "color": "brown"},
    "desk A": {"material": "wood", "color": "brown"},
    "desk B": {"material": "metal", "color": "white"},
    "doorway": {},
    "kitchen counter": {"color": "white"},
    "couch": {"color": "blue", "brand": "IKEA"},
    "door": {"material": "steel", "color": "grey"},
    "table": {"color": "white"},
}

# the counter sits behind the doorway, the couch behind the counter
ENV1_MAP = {
    "nodes": [
        {"name": "start", "labels": []},
        {"name": "hall", "labels": []},
        {"name": "door", "labels": ["door"]},
        {"name": "bookshelf", "labels": ["bookshelf"]},
        {"name": "desk_a", "labels": ["desk_a"]},
        {"name": "desk_b", "labels": ["desk_b"]},
        {"name": "table", "labels": ["table"]},
        {"name": "doorway", "labels": ["doorway"]},
        {"name": "kitchen_counter", "labels": ["kitchen_counter"]},
        {"name": "couch", "labels": ["couch"]},
    ],
    "edges": [["start", "hall"], ["hall", "door"], ["hall", "bookshelf"], ["hall", "desk_a"], ["hall", "desk_b"],
              ["hall", "table"], ["hall", "doorway"], ["doorway", "kitchen_counter"], ["kitchen_counter", "couch"]],
    "undirected": True,
    "initial": "start",
}

ENV1_COMMANDS = [
    ("go to brown bookshelf, metal desk, wooden desk, kitchen counter, and the blue couch in any order",
     f("visit", "bookshelf", "desk_b", "desk_a", "kitchen_counter", "couch"), "sat"),
    ("move to grey door, then bookrack, then brown desk, then counter, then white desk",
     f("sequence_visit", "door", "bookshelf", "desk_a", "kitchen_counter", "desk_b"), "sat"),
    ("visit brown wooden desk but only after bookshelf", f("ordered_visit", "bookshelf", "desk_a"), "sat"),
    ("go from brown bookshelf to white metal desk and only visit each landmark one time",
     f("strictly_ordered_visit", "bookshelf", "desk_b"), "sat"),
    ("go to brown wooden desk exactly once and do not visit brown desk before bookshelf",
     both(exact("desk_a", 1), not_before("desk_a", "bookshelf")), "sat"),
    ("go to white desk at least three times", lower("desk_b", 3), "sat"),
    ("go to wooden bookshelf at least five times", lower("bookshelf", 5), "sat"),
    ("visit bookshelf at most three times", upper("bookshelf", 3), "sat"),
    ("visit counter at most 5 times", upper("kitchen_counter", 5), "sat"),
    ("go to wooden desk exactly three times", exact("desk_a", 3), "sat"),
    ("move to brown wooden desk exactly 5 times", exact("desk_a", 5), "sat"),
    ("go to doorway exactly two times, in addition always avoid the table",
     both(exact("doorway", 2), never("table")), "sat"),
    ("go to brown desk only after visiting bookshelf, in addition go to brown desk only after visiting white desk",
     both(f("ordered_visit", "bookshelf", "desk_a"), f("ordered_visit", "desk_b", "desk_a")), "sat"),
    ("visit wooden desk exactly two times, in addition do not go to wooden desk before bookrack",
     both(exact("desk_a", 2), not_before("desk_a", "bookshelf")), "sat"),
    ("visit wooden desk at least two times, in addition do not go to wooden desk before bookshelf",
     both(lower("desk_a", 2), not_before("desk_a", "bookshelf")), "sat"),
    ("visit the blue IKEA couch, in addition never go to the big steel door", both("F couch", never("door")), "sat"),
    ("visit white kitchen counter then go to brown desk, in addition never visit white table",
     both(f("sequence_visit", "kitchen_counter", "desk_a"), never("table")), "sat"),
    ("go to the grey door, and only then go to the bookshelf, in addition always avoid the table",
     both(f("ordered_visit", "door", "bookshelf"), never("table")), "sat"),
    ("go to kitchen counter then wooden desk, in addition after going to counter, you must avoid white table",
     both(f("sequence_visit", "kitchen_counter", "desk_a"), f("future_avoidance", "kitchen_counter", "table")), "sat"),
    ("Go to bookshelf, alternatively go to metal desk", "| F bookshelf F desk_b", "sat"),
    ("Go to counter, alternatively go to metal desk", "| F kitchen_counter F desk_b", "sat"),
    ("Go to the counter, but never visit the counter", both("F kitchen_counter", never("kitchen_counter")), "unsat"),
    ("do not go to the wooden desk until bookshelf, and do not go to bookshelf until wooden desk",
     both(not_before("desk_a", "bookshelf"), not_before("bookshelf", "desk_a")), "unsat"),
    ("go to brown desk exactly once, in addition go to brown desk at least twice",
     both(exact("desk_a", 1), lower("desk_a", 2)), "unsat"),
    ("find the kitchen counter, in addition avoid the doorway", both("F kitchen_counter", never("doorway")), "unsat"),
    ("move to couch exactly twice, in addition pass by counter at most once",
     both(exact("couch", 2), upper("kitchen_counter", 1)), "unsat"),
    ("navigate to the counter then the brown desk, in addition after going to the counter, you must avoid doorway",
     both(f("sequence_visit", "kitchen_counter", "desk_a"), f("future_avoidance", "kitchen_counter", "doorway")),
     "unsat"),
]

ENV2_DB = {
    "hallway A": {"decoration": "painting"},
    "hallway B": {"decoration": "none"},
    "table A": {"location": "kitchen", "material": "metal", "color": "blue"},
    "table B": {"location": "atrium", "material": "metal", "color": "white"},
    "classroom": {"door": ["glass", "grey"]},
    "elevator": {"color": "purple"},
    "staircase": {},
    "front desk": {},
    "office": {"door": ["wood", "yellow"]},
}

# elevator and staircase hang off the entrance hallway; the kitchen table is
# behind the painted hallway; the office is reached through the front desk or
# the classroom
ENV2_MAP = {
    "nodes": [
        {"name": "start", "labels": []},
        {"name": "hallway_b", "labels": ["hallway_b"]},
        {"name": "elevator", "labels": ["elevator"]},
        {"name": "staircase", "labels": ["staircase"]},
        {"name": "front_desk", "labels": ["front_desk"]},
        {"name": "office", "labels": ["office"]},
        {"name": "hallway_a", "labels": ["hallway_a"]},
        {"name": "table_a", "labels": ["table_a"]},
        {"name": "table_b", "labels": ["table_b"]},
        {"name": "classroom", "labels": ["classroom"]},
    ],
    "edges": [["start", "hallway_b"], ["hallway_b", "elevator"], ["hallway_b", "staircase"],
              ["hallway_b", "front_desk"], ["front_desk", "office"], ["front_desk", "hallway_a"],
              ["hallway_a", "table_a"], ["front_desk", "table_b"], ["table_b", "classroom"],
              ["classroom", "office"]],
    "undirected": True,
    "initial": "start",
}

ENV2_COMMANDS = [
    # the kitchen counter and couch of this command do not exist here and are left out
    ("navigate to the office with the wooden door, the classroom with glass door and the table in the atrium in any order",
     f("visit", "office", "classroom", "table_b"), "sat"),
    ("go down the hallway decorated with paintings, then find the kitchen table, then front desk, then staircase",
     f("sequence_visit", "hallway_a", "table_a", "front_desk", "staircase"), "sat"),
    ("navigate to classroom but do not visit classroom before the white table in atrium",
     f("ordered_visit", "table_b", "classroom"), "sat"),
    ("only visit classroom once, and do not visit classroom until you visit elevator first",
     both(exact("classroom", 1), not_before("classroom", "elevator")), "sat"),
    ("Go to the staircase, front desk and the white table in the atrium in that exact order. "
     "You are not permitted to revisit any of these locations",
     f("strictly_ordered_visit", "staircase", "front_desk", "table_b"), "sat"),
    ("go to the purple elevator at least five times", lower("elevator", 5), "sat"),
    ("visit the kitchen table at most three times", upper("table_a", 3), "sat"),
    ("navigate to the classroom exactly four times", exact("classroom", 4), "sat"),
    ("go to the front desk then the yellow office door, in addition do not visit the classroom with glass door",
     both(f("sequence_visit", "front_desk", "office"), never("classroom")), "sat"),
    ("go to the stairs then the front desk, in addition avoid purple elevator",
     both(f("sequence_visit", "staircase", "front_desk"), never("elevator")), "sat"),
    ("move to elevator then front desk, in addition avoid staircase",
     both(f("sequence_visit", "elevator", "front_desk"), never("staircase")), "sat"),
    ("go to front desk exactly two times, in addition avoid elevator",
     both(exact("front_desk", 2), never("elevator")), "sat"),
    ("Go to elevator, alternatively go to staircase", "| F elevator F staircase", "sat"),
    ("Go to the front desk at least two different occasions, in addition you are only permitted to visit the "
     "staircase at most once", both(lower("front_desk", 2), upper("staircase", 1)), "sat"),
    ("Visit the elevator exactly once, in addition visit the front desk on at least 2 separate occasions",
     both(exact("elevator", 1), lower("front_desk", 2)), "sat"),
    ("Go to the office, in addition avoid visiting the elevator and the classroom",
     both("F office", never("elevator", "classroom")), "sat"),
    ("Visit the front desk, in addition you are not permitted to visit elevator and staircase",
     both("F front_desk", never("elevator", "staircase")), "sat"),
    ("Visit the purple door elevator, then go to the front desk and then go to the kitchen table, in addition you "
     "can never go to the elevator once you've seen the front desk",
     both(f("sequence_visit", "elevator", "front_desk", "table_a"), f("future_avoidance", "front_desk", "elevator")),
     "sat"),
    ("Visit the front desk then the white table, in addition if you visit the staircase you must avoid the elevator "
     "after that",
     both(f("sequence_visit", "front_desk", "table_b"), f("future_avoidance", "staircase", "elevator")), "sat"),
    ("Go to the classroom with glass door, but never visit the classroom with glass door",
     both("F classroom", never("classroom")), "unsat"),
    ("do not go to the white table until classroom, and do not go to the classroom until white table",
     both(not_before("table_b", "classroom"), not_before("classroom", "table_b")), "unsat"),
    ("go to kitchen table exactly once, in addition go to kitchen table at least twice",
     both(exact("table_a", 1), lower("table_a", 2)), "unsat"),
    ("find the office, in addition avoid visiting the front desk and the classroom and the table in atrium",
     both("F office", never("front_desk", "classroom", "table_b")), "unsat"),
    ("move to the kitchen table exactly twice, in addition pass by hallway decorated by paintings at most once",
     both(exact("table_a", 2), upper("hallway_a", 1)), "unsat"),
    ("navigate to the kitchen table then the front desk, in addition after going to the kitchen table, you must "
     "avoid hallway decorated with paintings",
     both(f("sequence_visit", "table_a", "front_desk"), f("future_avoidance", "table_a", "hallway_a")), "unsat"),
]


def main():
    out = Path(__file__).resolve().parent.parent / "crates/core/data/maps"
    out.mkdir(parents=True, exist_ok=True)
    for name, db, m, cmds in [("env1", ENV1_DB, ENV1_MAP, ENV1_COMMANDS), ("env2", ENV2_DB, ENV2_MAP, ENV2_COMMANDS)]:
        (out / f"{name}_db.json").write_text(json.dumps(db, indent=2) + "\n")
        (out / f"{name}.json").write_text(json.dumps(m, indent=2) + "\n")
        rows = [{"command": c, "ltl": ltl, "expected": e} for c, ltl, e in cmds]
        (out / f"{name}_commands.json").write_text(json.dumps(rows, indent=2) + "\n")
        print(name, len(rows), "commands,", sum(r["expected"] == "unsat" for r in rows), "unsat")


if __name__ == "__main__":
    main()
