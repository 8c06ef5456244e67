#!/usr/bin/env python3
"""Generate the lifted seed corpus (crates/core/data/lifted_seed.jsonl).

Every seed is a lifted command over placeholders A..E paired with its
template instance. Utterances are composed from per-family phrase banks; the
number of seeds per template is fixed by SEED_COUNTS so the augmented corpus
has known size and statistics. Deterministic.
"""

import json
import random
import sys
from pathlib import Path

PH = ["A", "B", "C", "D", "E"]

# (template id, seed count), catalog order
SEED_COUNTS = [
    ("visit_1", 58), ("visit_2", 24), ("visit_3", 25), ("visit_4", 22), ("visit_5", 24),
    ("sequence_visit_2", 23), ("sequence_visit_3", 25), ("sequence_visit_4", 21), ("sequence_visit_5", 24),
    ("ordered_visit_2", 23), ("ordered_visit_3", 22), ("ordered_visit_4", 22), ("ordered_visit_5", 24),
    ("strictly_ordered_visit_2", 22), ("strictly_ordered_visit_3", 25), ("strictly_ordered_visit_4", 24),
    ("strictly_ordered_visit_5", 20),
    ("patrolling_1", 24), ("patrolling_2", 24), ("patrolling_3", 26), ("patrolling_4", 23), ("patrolling_5", 23),
    ("bound_delay", 24), ("delayed_reaction", 24), ("prompt_reaction", 23), ("wait", 24),
    ("past_avoidance", 24), ("future_avoidance", 24),
    ("global_avoidance_1", 24), ("global_avoidance_2", 23), ("global_avoidance_3", 27), ("global_avoidance_4", 22),
    ("global_avoidance_5", 24),
    ("upper_restricted_avoidance_1", 22), ("upper_restricted_avoidance_2", 28), ("upper_restricted_avoidance_3", 25),
    ("upper_restricted_avoidance_4", 22), ("upper_restricted_avoidance_5", 25),
    ("lower_restricted_avoidance_2", 27), ("lower_restricted_avoidance_3", 28), ("lower_restricted_avoidance_4", 25),
    ("lower_restricted_avoidance_5", 30),
    ("exact_restricted_avoidance_1", 20), ("exact_restricted_avoidance_2", 27), ("exact_restricted_avoidance_3", 22),
    ("exact_restricted_avoidance_4", 25), ("exact_restricted_avoidance_5", 19),
]

FIXED_PAIRS = {"bound_delay", "delayed_reaction", "prompt_reaction", "wait", "past_avoidance", "future_avoidance"}


def split_id(tid):
    if tid in FIXED_PAIRS:
        return tid, 2
    fam, n = tid.rsplit("_", 1)
    return fam, int(n)


# ---- prefix formulas ------------------------------------------------------

def conj(items):
    out = items[-1]
    for x in reversed(items[:-1]):
        out = f"& {x} {out}"
    return out


def visits_at_least(a, k):
    f = f"F {a}"
    for _ in range(k - 1):
        f = f"F & {a} U {a} & ! {a} U ! {a} {f}"
    return f


def alternating_visits(a, length):
    lit = lambda i: a if i % 2 == 0 else f"! {a}"
    f = lit(length - 1)
    for i in reversed(range(length - 1)):
        f = f"& {lit(i)} F {f}"
    return f


def alternating_stays(a, length):
    lit = lambda i: f"! {a}" if i % 2 == 0 else a
    f = f"G {lit(length - 1)}"
    for i in reversed(range(1, length - 1)):
        f = f"G | {lit(i)} {f}"
    return f"| {lit(0)} {f}"


def formula(fam, n, p=PH):
    if fam == "visit":
        return conj([f"F {x}" for x in p[:n]])
    if fam == "sequence_visit":
        f = f"F {p[n - 1]}"
        for x in reversed(p[: n - 1]):
            f = f"F & {x} {f}"
        return f
    ordered = [f"U ! {p[i + 1]} {p[i]}" for i in range(n - 1)]
    if fam == "ordered_visit":
        return conj([f"F {p[n - 1]}"] + ordered)
    if fam == "strictly_ordered_visit":
        strict = [f"U ! {p[i]} U {p[i]} U ! {p[i]} {p[i + 1]}" for i in range(n - 1)]
        return conj([f"F {p[n - 1]}"] + ordered + strict)
    if fam == "patrolling":
        return conj([f"G F {x}" for x in p[:n]])
    a, b = p[0], p[1]
    if fam == "bound_delay":
        return f"G e {a} X {b}"
    if fam == "delayed_reaction":
        return f"G i {a} F {b}"
    if fam == "prompt_reaction":
        return f"G i {a} X {b}"
    if fam == "wait":
        return f"W {a} {b}"
    if fam == "past_avoidance":
        return f"W ! {a} {b}"
    if fam == "future_avoidance":
        return f"G i {a} X G ! {b}"
    if fam == "global_avoidance":
        return conj([f"G ! {x}" for x in p[:n]])
    if fam == "upper_restricted_avoidance":
        return "! " + visits_at_least(a, n + 1)
    if fam == "lower_restricted_avoidance":
        return visits_at_least(a, n)
    if fam == "exact_restricted_avoidance":
        return f"M {alternating_visits(a, 2 * n - 1)} {alternating_stays(a, 2 * n + 1)}"
    raise ValueError(fam)


# ---- utterances -----------------------------------------------------------

def lists(xs):
    """Ways to list places without implying an order."""
    if len(xs) == 1:
        return [xs[0]]
    head = ", ".join(xs[:-1])
    out = [f"{head} and {xs[-1]}", f"{' and '.join(xs)}"]
    if len(xs) > 2:
        out += [f"{head}, and {xs[-1]}", f"{', '.join(xs)}"]
    return out


def either(xs):
    if len(xs) == 1:
        return [xs[0]]
    head = ", ".join(xs[:-1])
    out = [f"{head} or {xs[-1]}", f"{' or '.join(xs)}"]
    if len(xs) > 2:
        out.append(f"{head}, or {xs[-1]}")
    return out


def chains(xs):
    """Ways to list places in order."""
    out = [
        ", then ".join(xs),
        " and then ".join(xs),
        " followed by ".join(xs),
        "first " + ", then ".join(xs[:-1]) + (", and finally " if len(xs) > 2 else ", and then ") + xs[-1],
    ]
    if len(xs) > 2:
        out.append(", ".join(xs[:-1]) + " and lastly " + xs[-1])
    return out


COUNT = {1: "once", 2: "twice", 3: "three times", 4: "four times", 5: "five times", 6: "six times"}
NUM = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six"}

OPENERS = ["", "please ", "robot, ", "you should ", "i need you to ", "make sure to ", "you must ", "go ahead and ",
           "your task is to ", "i want you to ", "remember to ", "try to "]
CLOSERS = ["", " please", " for me", " today", " when you get a chance", " on this trip"]


def cores(fam, n):
    xs = PH[:n]
    a, b = PH[0], PH[1]
    c = []
    if fam == "visit":
        for L in lists(xs):
            c += [f"visit {L}", f"go to {L}", f"reach {L}", f"make your way to {L}", f"stop by {L}",
                  f"eventually go to {L}", f"navigate to {L}", f"head over to {L} at some point", f"drop by {L}",
                  f"get to {L} eventually"]
            if n > 1:
                c += [f"visit {L} in any order", f"go to {L} in whatever order you like", f"reach all of {L}"]
    elif fam == "sequence_visit":
        for S in chains(xs):
            c += [f"visit {S}", f"go to {S}", f"reach {S}", f"make your way to {S}", f"head to {S}"]
        c += [f"visit {' before '.join(xs)}", f"go to {xs[0]} and afterwards reach " + " and later ".join(xs[1:])]
    elif fam == "ordered_visit":
        for L in lists(xs):
            c += [f"visit {L} in this order without reaching any of them ahead of its turn",
                  f"go to {L} in order, and do not visit a later one before an earlier one",
                  f"reach {L} in sequence, never going to one before the one listed ahead of it"]
        for S in chains(xs):
            c += [f"go to {S}, and do not visit any place before the one listed ahead of it",
                  f"visit {S}, never arriving somewhere out of turn"]
        pairs = ", ".join(f"{xs[i + 1]} before {xs[i]}" for i in range(n - 1))
        c += [f"end up at {xs[-1]} and do not visit {pairs}",
              f"do not go to {pairs}, and make sure you reach {xs[-1]}"]
    elif fam == "strictly_ordered_visit":
        for L in lists(xs):
            c += [f"visit {L} in order, going to each exactly once before moving to the next",
                  f"reach {L} one after another, without returning to any of them before the next",
                  f"go to {L} in strict order and do not revisit a place before reaching the next one"]
        for S in chains(xs):
            c += [f"visit {S}, and do not go back to a place until the next one is reached",
                  f"go to {S}, each only once and only in that order"]
    elif fam == "patrolling":
        for L in lists(xs):
            c += [f"keep visiting {L} forever", f"patrol {L}", f"visit {L} infinitely often",
                  f"go to {L} over and over again", f"keep cycling through {L}", f"never stop returning to {L}",
                  f"repeatedly visit {L} without end"]
    elif fam == "bound_delay":
        c += [f"go to {b} right after every visit to {a}, and only right after {a}",
              f"whenever you are at {a}, be at {b} in the next step, and be at {b} only then",
              f"visit {b} at the next moment exactly when you have just seen {a}",
              f"you may be at {b} if and only if you were at {a} one step before",
              f"reach {b} in the next instant precisely when you see {a}",
              f"be at {b} next exactly in those moments that you are at {a}"]
    elif fam == "delayed_reaction":
        c += [f"whenever you see {a}, go to {b} at some point afterwards",
              f"every time you reach {a}, eventually visit {b}",
              f"after each visit to {a}, make sure you later get to {b}",
              f"respond to every {a} by eventually going to {b}",
              f"if you ever visit {a}, you must reach {b} sometime after that",
              f"each time {a} happens, {b} has to follow eventually"]
    elif fam == "prompt_reaction":
        c += [f"whenever you see {a}, go to {b} at the very next step",
              f"every time you reach {a}, be at {b} immediately afterwards",
              f"go to {b} right after each visit to {a}",
              f"after any visit to {a}, move to {b} in the next instant",
              f"if you are ever at {a}, your next stop must be {b}",
              f"respond to {a} by being at {b} at once"]
    elif fam == "wait":
        c += [f"stay at {a} until you see {b}", f"wait at {a} until {b}", f"remain at {a} until {b} shows up",
              f"keep to {a} until {b} happens, even if it never does", f"hold your position at {a} until {b}",
              f"do not leave {a} until {b}"]
    elif fam == "past_avoidance":
        c += [f"avoid {a} until you reach {b}", f"do not visit {a} until {b}",
              f"stay away from {a} until you have seen {b}", f"do not go to {a} before {b}",
              f"keep out of {a} until {b} happens, if it ever does", f"never enter {a} prior to {b}"]
    elif fam == "future_avoidance":
        c += [f"once you visit {a}, never go to {b} afterwards", f"after reaching {a}, avoid {b} forever",
              f"if you ever go to {a}, stay away from {b} from then on",
              f"as soon as you have seen {a}, do not enter {b} anymore",
              f"after {a}, {b} is off limits for good", f"following any visit to {a}, never return to {b}"]
    elif fam == "global_avoidance":
        for L in either(xs) + lists(xs):
            c += [f"never visit {L}", f"avoid {L} at all times", f"always stay away from {L}",
                  f"do not ever go to {L}", f"keep clear of {L} forever"]
    elif fam == "upper_restricted_avoidance":
        k = COUNT[n]
        c += [f"visit {a} at most {k}", f"do not go to {a} more than {k}", f"go to {a} no more than {k}",
              f"you can reach {a} up to {k}", f"enter {a} {k} at most", f"limit your visits to {a} to {NUM[n]}",
              f"never visit {a} more than {k}"]
    elif fam == "lower_restricted_avoidance":
        k = COUNT[n]
        c += [f"visit {a} at least {k}", f"go to {a} {k} or more", f"reach {a} no fewer than {k}",
              f"make at least {NUM[n]} separate visits to {a}", f"visit {a} {k} or more than {k}",
              f"go to {a} a minimum of {NUM[n]} times" if n > 1 else f"go to {a} at least one time",
              f"enter {a} on {NUM[n]} or more separate occasions"]
    elif fam == "exact_restricted_avoidance":
        k = COUNT[n]
        c += [f"visit {a} exactly {k}", f"go to {a} precisely {k}, no more and no less",
              f"make exactly {NUM[n]} separate visits to {a}", f"reach {a} {k} and only {k}",
              f"enter {a} exactly {NUM[n]} separate times" if n > 1 else f"enter {a} exactly one time",
              f"be at {a} on exactly {NUM[n]} separate occasions" if n > 1 else f"be at {a} on exactly one occasion"]
    else:
        raise ValueError(fam)
    return c


def utterances(fam, n):
    return [o + core + cl for core in cores(fam, n) for o in OPENERS for cl in CLOSERS]


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/core/data/lifted_seed.jsonl"
    rng = random.Random(1156)
    lines = []
    for tid, count in SEED_COUNTS:
        fam, n = split_id(tid)
        pool = sorted(set(utterances(fam, n)))
        rng.shuffle(pool)
        # prefer spreading across cores: take round-robin over distinct cores
        by_core = {}
        for u in pool:
            by_core.setdefault(next(c for c in cores(fam, n) if c in u), []).append(u)
        picked = []
        buckets = list(by_core.values())
        while len(picked) < count:
            for bkt in buckets:
                if bkt and len(picked) < count:
                    picked.append(bkt.pop())
        f = formula(fam, n)
        props = list(dict.fromkeys(t for t in f.split() if t in PH))
        for u in picked:
            words = set(u.replace(",", " ").split())
            assert all(p in words for p in props), (tid, u)
            lines.append(json.dumps({"utterance": u, "ltl_prefix": f, "template_id": tid,
                                     "props": props, "origin": "seed"}, ensure_ascii=False))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} seeds to {out}")


if __name__ == "__main__":
    main()
