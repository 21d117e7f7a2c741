#!/usr/bin/env python3
"""Validates samples and CLI artifacts against the JSON schemas.

usage: check_schemas.py <lerf binary> <schema dir> <samples dir>
"""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

cli, schema_dir, samples = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])

schemas = {}
for path in sorted(schema_dir.glob("*.schema.json")):
    doc = json.loads(path.read_text())
    jsonschema.Draft202012Validator.check_schema(doc)
    schemas[path.name.removesuffix(".schema.json")] = doc
registry = Registry().with_resources((s["$id"], Resource.from_contents(s)) for s in schemas.values())

failures = []


def check(name, doc, what, valid=True):
    errors = list(jsonschema.Draft202012Validator(schemas[name], registry=registry).iter_errors(doc))
    if valid and errors:
        failures.append(f"{what}: {errors[0].message} at {list(errors[0].absolute_path)}")
    if not valid and not errors:
        failures.append(f"{what}: accepted by {name} but should not be")


def run(args, expected):
    out = subprocess.run([cli, *args], capture_output=True, text=True)
    if out.returncode != expected:
        failures.append(f"{' '.join(args)}: exit {out.returncode}, expected {expected}: {out.stderr.strip()}")
        return None
    return json.loads(out.stdout)


sample_schema = {
    "bs2.json": "action",
    "f2_mod_a.json": "action",
    "trivial.json": "action",
    "z_translation.json": "action",
    "ball_f2.json": "ball",
    "schedule_f2.json": "schedule",
    "schedule_finf.json": "schedule",
    "schedule_zz.json": "schedule",
}
for path in sorted(samples.glob("*.json")):
    if path.name not in sample_schema:
        failures.append(f"sample {path.name} has no schema")
        continue
    check(sample_schema[path.name], json.loads(path.read_text()), f"sample {path.name}")

s = str(samples) + "/"
commands = [
    ("separate-output", ["separate", "--group", "f2", "--subgroup", "aa,b", "--element", "a", "--verify"], 0),
    ("separate-output", ["separate", "--group", "f3", "--subgroup", "c,abA", "--element", "ba"], 0),
    ("refusal", ["separate", "--group", "f2", "--subgroup", "aa,b", "--element", "aab"], 2),
    ("chabauty-approx-output", ["chabauty", "approx", "--group", "f2", "--subgroup", "aa,b", "--radius", "2"], 0),
    ("in-ball-output", ["chabauty", "in-ball", "--ball", s + "ball_f2.json", "--subgroup", "aa,b,abA"], 0),
    ("in-ball-output", ["chabauty", "in-ball", "--ball", s + "ball_f2.json", "--subgroup", "a"], 0),
    ("orbit-output", ["orbit", "--action", s + "trivial.json", "--point", "3"], 0),
    ("orbit-output", ["orbit", "--action", s + "f2_mod_a.json", "--point", "0", "--budget", "30"], 2),
    ("folner-check-output", ["folner-check", "--action", s + "z_translation.json", "--F", "0,1,2,3"], 0),
    ("folner-search-output", ["folner-search", "--action", s + "bs2.json", "--epsilon", "1/2", "--verify"], 0),
    ("refusal", ["folner-search", "--action", s + "f2_mod_a.json", "--epsilon", "1/4", "--budget", "20"], 2),
    ("combine-output", ["combine", "--sigma", s + "z_translation.json", "--tau", s + "z_translation.json",
                        "--epsilon", "1/4", "--A", "0,1,2", "--verify"], 0),
    ("bs-witness-output", ["bs-witness", "--n", "3", "--dmax", "4"], 0),
    ("transcript", ["generic", "run", "--schedule", s + "schedule_f2.json", "--stages", "8"], 0),
    ("transcript", ["generic", "run", "--schedule", s + "schedule_finf.json"], 0),
    ("transcript", ["generic", "run", "--schedule", s + "schedule_zz.json", "--verify"], 0),
    ("transcript", ["generic", "run", "--group", "f2", "--random", "4", "--seed", "5"], 0),
]
emitted_actions = []
for name, args, expected in commands:
    doc = run(args, expected)
    if doc is None:
        continue
    check(name, doc, " ".join(args))
    if name == "combine-output":
        emitted_actions += [doc["phi"], doc["psi"]]
    if name == "transcript":
        emitted_actions.append(doc["final_action"])
        for stage in doc["stages"]:
            if "certificate" in stage["witness"]:
                check("certificate", stage["witness"]["certificate"], "stage certificate")

# Emitted action descriptors read back through the CLI.
with tempfile.TemporaryDirectory() as work:
    for i, act in enumerate(emitted_actions):
        check("action", act, f"emitted action {i}")
        path = pathlib.Path(work) / f"action_{i}.json"
        path.write_text(json.dumps(act))
        out = subprocess.run([cli, "orbit", "--action", str(path), "--point", "0", "--budget", "50"],
                             capture_output=True, text=True)
        if out.returncode not in (0, 2):
            failures.append(f"emitted action {i} not readable: {out.stderr.strip()}")

rejected = [
    ("group", {"kind": "free"}),
    ("group", {"kind": "bs", "n": 1}),
    ("action", {"kind": "affine_bs"}),
    ("action", {"kind": "finsupp", "group": {"kind": "free", "rank": 1}, "perms": [[[0, 1, 2]]]}),
    ("action", {"kind": "free_product", "left": {"kind": "affine_bs", "n": 2}}),
    ("certificate", {"F": [], "omega": ["a"], "epsilon": "1/2", "ratios": {}}),
    ("certificate", {"F": [0], "omega": ["a"], "epsilon": "0.5", "ratios": {}}),
    ("schedule", {"group": {"kind": "free", "rank": 2}, "schedule": [{"provider": "finite_orbit", "x": 0}]}),
    ("ball", {"center": {"kind": "words", "group": {"kind": "free", "rank": 2}}, "window": []}),
]
for name, doc in rejected:
    check(name, doc, json.dumps(doc), valid=False)

for f in failures:
    print("FAIL", f)
print(f"{len(schemas)} schemas, {len(sample_schema)} samples, {len(commands)} commands, "
      f"{len(emitted_actions)} emitted actions, {len(rejected)} rejections: {len(failures)} failures")
sys.exit(1 if failures else 0)
