#!/usr/bin/env python3
"""Regenerate the truss fixtures under data/models."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "models"

PLA = {"elastic_modulus": 3500.0, "shear_modulus": 1290.0, "density": 1240.0}


def write(name, nodes, elements, radius=1.5, layers=None):
    doc = {
        "version": 1,
        "nodes": [{"id": i, "xyz": list(p), "grounded": g} for i, (p, g) in enumerate(nodes)],
        "elements": [],
        "material": PLA,
        "section": {"radius": radius},
    }
    for i, (a, b) in enumerate(elements):
        e = {"id": i, "start": a, "end": b}
        if layers is not None:
            e["layer"] = layers[i]
        doc["elements"].append(e)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def cube23():
    L, cx, cy = 120.0, 450.0, 0.0
    h = L / 2
    corners = [(-h, -h), (h, -h), (h, h), (-h, h)]
    nodes = [((cx + x, cy + y, 0.0), True) for x, y in corners]
    nodes += [((cx + x, cy + y, L), False) for x, y in corners]
    nodes.append(((cx, cy, h), False))  # internal crossing node
    b = [0, 1, 2, 3]
    t = [4, 5, 6, 7]
    c = 8
    # listed bottom-up, interior crossing before the faces that enclose it
    bottom = [(b[i], b[(i + 1) % 4]) for i in range(4)] + [(b[0], b[2])]
    crossing_low = [(c, b[0]), (c, b[1]), (c, b[2])]
    columns = [(b[i], t[i]) for i in range(4)]
    face_diagonals = [(b[i], t[(i + 1) % 4]) for i in range(4)]
    crossing_high = [(c, t[2]), (c, t[3])]
    top = [(t[i], t[(i + 1) % 4]) for i in range(4)] + [(t[0], t[2])]
    elements = bottom + crossing_low + columns + face_diagonals + crossing_high + top
    write("cube23", nodes, elements)


def two_stack():
    nodes = [((450.0, 0.0, 0.0), True), ((450.0, 0.0, 50.0), False), ((450.0, 0.0, 100.0), False)]
    write("two_stack", nodes, [(1, 2), (0, 1)])


def single():
    write("single", [((450.0, 0.0, 0.0), True), ((450.0, 0.0, 60.0), False)], [(0, 1)])


def tower(stories=4, width=100.0, height=60.0):
    cx, h = 450.0, width / 2
    corners = [(-h, -h), (h, -h), (h, h), (-h, h)]
    nodes = []
    for s in range(stories + 1):
        for x, y in corners:
            nodes.append(((cx + x, y, s * height), s == 0))
    elements, layers = [], []
    for i in range(4):
        elements.append((i, (i + 1) % 4))
        layers.append(0)
    for s in range(stories):
        lo, hi = 4 * s, 4 * (s + 1)
        for i in range(4):
            elements.append((lo + i, hi + i))
            layers.append(s)
        for i in range(4):
            a, b = (i, (i + 1) % 4) if s % 2 == 0 else ((i + 1) % 4, i)
            elements.append((lo + a, hi + b))
            layers.append(s)
        for i in range(4):
            elements.append((hi + i, hi + (i + 1) % 4))
            layers.append(s)
    write("tower52", nodes, elements, layers=layers)


if __name__ == "__main__":
    cube23()
    two_stack()
    single()
    tower()
