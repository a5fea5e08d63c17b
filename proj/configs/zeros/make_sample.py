"""Writes sample.csv: feasible households under rules.txt (fixed seed)."""
import csv
import random

rng = random.Random(2015)
rows = []
hid = 0
while hid < 600:
    size = rng.choices([1, 2, 3, 4], [0.25, 0.35, 0.25, 0.15])[0]
    own = rng.choices([1, 2], [0.65, 0.35])[0]
    race = rng.choices([1, 2, 3], [0.7, 0.2, 0.1])[0]
    head_age = rng.choices([2, 3, 4], [0.3, 0.5, 0.2])[0]
    members = [(1, race, rng.choice([1, 2]), head_age)]
    spouse = False
    for _ in range(size - 1):
        rel = rng.choices([2, 3, 4, 5, 6], [0.35, 0.45, 0.03, 0.05, 0.12])[0]
        if rel == 2 and spouse:
            rel = 3
        if rel == 2:
            spouse = True
            age = max(2, min(4, head_age + rng.choice([-1, 0, 0, 1])))
        elif rel in (3, 4):
            lo = 2 if rel == 4 else 1
            if head_age - 1 < lo:
                rel, age = 6, rng.choice([2, 3])
            else:
                age = rng.randint(lo, head_age - 1)
        elif rel == 5:
            if head_age == 4:
                rel, age = 6, rng.choice([1, 2, 3, 4])
            else:
                age = rng.randint(head_age + 1, 4)
        else:
            age = rng.choice([1, 2, 3, 4])
        r = race if rng.random() < 0.9 else rng.choice([1, 2, 3])
        members.append((rel, r, rng.choice([1, 2]), age))
    hid += 1
    for j, (rel, r, g, a) in enumerate(members, start=1):
        rows.append([hid, j, size, own, rel, r, g, a])

with open("sample.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["household_id", "person_index", "size", "ownership", "relationship", "race", "gender", "age"])
    w.writerows(rows)
