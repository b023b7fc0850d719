#!/usr/bin/env python3
"""Validate a session.json against the shipped schema.

Beyond the schema, checks the invariants JSON Schema cannot express: grid
dimensions match the room size, every glyph is in the legend, history
intervals are ordered and non-empty, and transitions name existing rooms.

Usage: validate_session.py SCHEMA SESSION
"""

import json
import sys

import jsonschema


def semantic_errors(doc):
    errors = []
    glyphs = set(doc["legend"]["tiles"]) | {doc["legend"]["unobserved"]}
    room_ids = {r["id"] for r in doc["rooms"]}
    for room in doc["rooms"]:
        rid = room["id"]
        if len(room["grid"]) != room["height"]:
            errors.append(f"room {rid}: {len(room['grid'])} grid rows, height is {room['height']}")
        for y, row in enumerate(room["grid"]):
            if len(row) != room["width"]:
                errors.append(f"room {rid} row {y}: {len(row)} cells, width is {room['width']}")
            unknown = set(row) - glyphs
            if unknown:
                errors.append(f"room {rid} row {y}: glyphs {sorted(unknown)} not in legend")
        for h in room["histories"]:
            if h["x"] >= room["width"] or h["y"] >= room["height"]:
                errors.append(f"room {rid}: history at ({h['x']},{h['y']}) outside the grid")
            last_end = -1
            for start, end, glyph in h["intervals"]:
                if end <= start or start < last_end:
                    errors.append(f"room {rid} cell ({h['x']},{h['y']}): bad interval [{start},{end})")
                if glyph not in glyphs:
                    errors.append(f"room {rid} cell ({h['x']},{h['y']}): glyph {glyph!r} not in legend")
                last_end = end
    for t in doc["transitions"]:
        for end in ("from", "to"):
            if t[end] not in room_ids:
                errors.append(f"transition at frame {t['frame']}: room {t[end]} does not exist")
    for c in doc["clusters"]:
        n = len(c["members"])
        if len(c["similarity"]) != n or any(len(row) != n for row in c["similarity"]):
            errors.append(f"cluster {c['id']}: similarity matrix is not {n}x{n}")
    return errors


def main(argv):
    if len(argv) != 3:
        print(__doc__.strip().splitlines()[-1], file=sys.stderr)
        return 2
    with open(argv[1], encoding="utf-8") as f:
        schema = json.load(f)
    with open(argv[2], encoding="utf-8") as f:
        doc = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)
    errors = [f"{'/'.join(map(str, e.absolute_path)) or '(root)'}: {e.message}"
              for e in sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.path)))]
    if not errors:
        errors = semantic_errors(doc)
    for e in errors[:50]:
        print(e, file=sys.stderr)
    if errors:
        print(f"{argv[2]}: {len(errors)} problem(s)", file=sys.stderr)
        return 1
    print(f"{argv[2]}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
