#!/usr/bin/env python3
"""Regenerates the golden world scripts and input movies under data/.

Output is deterministic: every world is filled from a seeded RNG, so running
this again reproduces the checked-in files byte for byte.
"""

import argparse
import pathlib
import random

RIGHT = ".......R"
DOWN = ".....D.."
IDLE = "........"


def world_rows(rng, width, height, palette_of):
    rows = []
    for y in range(height):
        row = []
        for x in range(width):
            row.append(f"{rng.randrange(64)}:{palette_of(x, y)}:0")
        rows.append(" ".join(row))
    return rows


def write_movie(path, frames, title):
    lines = [f"title: {title}", "source: tools/gen_golden.py"]
    lines += frames
    path.write_text("\n".join(lines) + "\n")


def reference(out):
    """Three rooms: a scroll exit, then a death warp back to the start."""
    rng = random.Random(1)
    text = ["# Reference run: walk right, scripted exit to the next screen,",
            "# walk on, then a warp back to the start.",
            "[world overworld 128 30]"]
    text += world_rows(rng, 128, 30, lambda x, y: min(7, x // 8))
    text += [
        "[timeline]",
        "control 0..90",
        "autoscroll 90..154 4 0",
        "control 162..240",
        "teleport 240 overworld 0 0",
        "control 240..360",
        "tilechange overworld 20 10 40 63:0:1",
        "sprite enemy 20..200 path=(120,88)->(120,88) tiles=5:2:1,6:2:1 world=overworld",
    ]
    (out / "scripts" / "reference.txt").write_text("\n".join(text) + "\n")
    frames = [RIGHT] * 360
    write_movie(out / "movies" / "reference.inp", frames, "reference")


def corridor(out):
    """A tall corridor, one screen wide, walked from top to bottom."""
    rng = random.Random(2)
    text = ["# Tall vertical corridor: 32x90 tiles, walked downward.",
            "[world corridor 32 90]"]
    text += world_rows(rng, 32, 90, lambda x, y: 1 + (y // 15))
    text += ["[timeline]", "control 0..600"]
    (out / "scripts" / "corridor.txt").write_text("\n".join(text) + "\n")
    write_movie(out / "movies" / "corridor.inp", [DOWN] * 600, "corridor")


def long_pan(out):
    """A large static world panned along a scripted path; no tile changes."""
    rng = random.Random(3)
    text = ["# Long scripted pan across a static world, under player control throughout.",
            "[world plain 256 160]"]
    text += world_rows(rng, 256, 160, lambda x, y: (x // 20 + y // 15) % 8)
    text += ["[timeline]", "control 0..1200"]
    # Segments with per-frame deltas up to 8 px in each axis, kept inside the world.
    segments = [(0, 100, 1, 0), (100, 200, 3, 1), (200, 260, 8, 0), (260, 340, 0, 2),
                (340, 400, -2, 3), (400, 480, 5, 0), (480, 540, 0, 5), (540, 600, -8, -1),
                (600, 700, 2, -2), (700, 760, 7, 4), (760, 860, -3, 0), (860, 940, 1, -3),
                (940, 1000, 4, 2), (1000, 1100, -1, -1), (1100, 1200, 0, 1)]
    x, y = 0, 0
    for f0, f1, dx, dy in segments:
        x += (f1 - f0) * dx
        y += (f1 - f0) * dy
        assert 0 <= x <= 256 * 8 - 256 and 0 <= y <= 160 * 8 - 240, (f0, x, y)
        text.append(f"scroll {f0}..{f1} {dx} {dy}")
    (out / "scripts" / "long.txt").write_text("\n".join(text) + "\n")
    write_movie(out / "movies" / "long.inp", [IDLE] * 1200, "long pan")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    (out / "scripts").mkdir(parents=True, exist_ok=True)
    (out / "movies").mkdir(parents=True, exist_ok=True)
    reference(out)
    corridor(out)
    long_pan(out)


if __name__ == "__main__":
    main()
