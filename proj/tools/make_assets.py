#!/usr/bin/env python3
"""Regenerates the low-poly pedestrian assets and the unit-cube fixture in assets/.

Each human is a union of textured boxes; every box samples one texel of a
small palette texture, so the OBJ stays tiny and renders with flat colours.
"""
import os
import sys

from PIL import Image

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "assets")

FACES = [  # (normal, four corner selectors as (x, y, z) in {0,1})
    ((1, 0, 0), [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)]),
    ((-1, 0, 0), [(0, 0, 1), (0, 1, 1), (0, 1, 0), (0, 0, 0)]),
    ((0, 1, 0), [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)]),
    ((0, -1, 0), [(0, 0, 1), (0, 0, 0), (1, 0, 0), (1, 0, 1)]),
    ((0, 0, 1), [(1, 0, 1), (1, 1, 1), (0, 1, 1), (0, 0, 1)]),
    ((0, 0, -1), [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)]),
]


def write_mesh(name, boxes, palette, unit=1.0, texture=True):
    """boxes: list of (x0, x1, y0, y1, z0, z1, palette_index) in meters."""
    lines = [f"# {name}: generated by tools/make_assets.py", f"mtllib {name}.mtl", f"usemtl {name}"]
    normals = [n for n, _ in FACES]
    for n in normals:
        lines.append("vn %d %d %d" % n)
    n_side = 4
    for i in range(len(palette)):
        u = ((i % n_side) + 0.5) / n_side
        v = 1.0 - ((i // n_side) + 0.5) / n_side
        lines.append(f"vt {u:.6f} {v:.6f}")
    vcount = 0
    for (x0, x1, y0, y1, z0, z1, tex) in boxes:
        for f, (_, corners) in enumerate(FACES):
            idx = []
            for (cx, cy, cz) in corners:
                x = (x1 if cx else x0) * unit
                y = (y1 if cy else y0) * unit
                z = (z1 if cz else z0) * unit
                lines.append(f"v {x:.6f} {y:.6f} {z:.6f}")
                vcount += 1
                idx.append(vcount)
            lines.append("f " + " ".join(f"{i}/{tex + 1}/{f + 1}" for i in idx))
    with open(os.path.join(OUT, f"{name}.obj"), "w") as fh:
        fh.write("\n".join(lines) + "\n")

    mtl = [f"newmtl {name}", "Kd 0.8 0.8 0.8"]
    if texture:
        mtl.append(f"map_Kd {name}.png")
        img = Image.new("RGB", (n_side, n_side), (0, 0, 0))
        for i, c in enumerate(palette):
            img.putpixel((i % n_side, i // n_side), c)
        img.save(os.path.join(OUT, f"{name}.png"))
    with open(os.path.join(OUT, f"{name}.mtl"), "w") as fh:
        fh.write("\n".join(mtl) + "\n")


def human(leg_h, torso_h, head, shoulder, depth, arm_w):
    """Box list for a standing figure centred on x = z = 0, feet at y = 0."""
    SKIN, SHIRT, PANTS, SHOES, HAIR = 0, 1, 2, 3, 4
    hip = leg_h
    neck = hip + torso_h
    b = []
    for side in (-1, 1):
        x_in, x_out = sorted((side * 0.02, side * (shoulder - 0.04)))
        b.append((x_in, x_out, 0.0, 0.08, -depth * 0.8, depth * 0.9, SHOES))
        b.append((x_in, x_out, 0.08, hip, -depth * 0.7, depth * 0.7, PANTS))
        ax0, ax1 = sorted((side * shoulder, side * (shoulder + arm_w)))
        b.append((ax0, ax1, hip - 0.05, neck - 0.04, -depth * 0.5, depth * 0.5, SHIRT))
        b.append((ax0, ax1, hip - 0.15, hip - 0.05, -depth * 0.45, depth * 0.45, SKIN))
    b.append((-shoulder, shoulder, hip, neck, -depth, depth, SHIRT))
    b.append((-0.05, 0.05, neck, neck + 0.05, -0.05, 0.05, SKIN))
    top = neck + 0.05 + head
    b.append((-0.1, 0.1, neck + 0.05, top - 0.04, -0.11, 0.11, SKIN))
    b.append((-0.105, 0.105, top - 0.04, top, -0.115, 0.115, HAIR))
    return b


def main():
    os.makedirs(OUT, exist_ok=True)
    write_mesh(
        "human_a",
        human(leg_h=0.86, torso_h=0.58, head=0.26, shoulder=0.2, depth=0.12, arm_w=0.07),
        [(224, 172, 140), (40, 90, 170), (50, 50, 60), (30, 25, 20), (60, 40, 25)],
    )
    # second figure is modelled in centimeters to exercise asset rescaling
    write_mesh(
        "human_b",
        human(leg_h=0.92, torso_h=0.55, head=0.25, shoulder=0.18, depth=0.11, arm_w=0.06),
        [(150, 105, 80), (190, 40, 40), (120, 110, 90), (240, 240, 240), (20, 20, 20)],
        unit=100.0,
    )
    write_mesh("fixture_unit_cube", [(-0.5, 0.5, 0.0, 1.0, -0.5, 0.5, 0)], [(255, 255, 255)], texture=False)
    return 0


if __name__ == "__main__":
    sys.exit(main())
