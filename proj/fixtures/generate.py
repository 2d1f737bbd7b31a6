#!/usr/bin/env python3
"""Writes the bundled test scenes.

shoebox/   3.6 x 8.2 x 2.9 m room, one 2.4 x 1.5 m south window, ground plane
           and a single facade slab 16 m in front of the window.
district/  the same room inside a context of four buildings on a tessellated
           ground plane (about 5k triangles).

Run from this directory: python3 generate.py
"""
import json
import os

ROOM = dict(x0=0.0, x1=3.6, y0=0.0, y1=8.2, z0=0.0, z1=2.9)
WINDOW = dict(x0=0.6, x1=3.0, z0=0.8, z1=2.3)  # in the y = 0 wall
GROUND_Z = -0.1


class Obj:
    def __init__(self):
        self.lines = []
        self.nv = 0

    def group(self, name):
        self.lines.append(f"g {name}")

    def quad(self, a, b, c, d):
        for p in (a, b, c, d):
            self.lines.append("v {} {} {}".format(*(repr(float(x)) for x in p)))
        n = self.nv
        self.lines.append(f"f {n + 1} {n + 2} {n + 3} {n + 4}")
        self.nv += 4

    def grid(self, origin, u, v, nu, nv):
        """Quad grid spanning origin + s*u + t*v for s, t in [0, 1]."""
        def at(i, j):
            return tuple(origin[k] + u[k] * i / nu + v[k] * j / nv for k in range(3))
        for i in range(nu):
            for j in range(nv):
                self.quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1))

    def box(self, x0, x1, y0, y1, z0, z1, cell):
        dx, dy, dz = x1 - x0, y1 - y0, z1 - z0
        nx, ny, nz = (max(1, round(d / cell)) for d in (dx, dy, dz))
        self.grid((x0, y0, z0), (dx, 0, 0), (0, 0, dz), nx, nz)  # south
        self.grid((x0, y1, z0), (dx, 0, 0), (0, 0, dz), nx, nz)  # north
        self.grid((x0, y0, z0), (0, dy, 0), (0, 0, dz), ny, nz)  # west
        self.grid((x1, y0, z0), (0, dy, 0), (0, 0, dz), ny, nz)  # east
        self.grid((x0, y0, z1), (dx, 0, 0), (0, dy, 0), nx, ny)  # roof

    def write(self, path, header):
        with open(path, "w", newline="\n") as f:
            f.write(f"# {header}\n")
            f.write("\n".join(self.lines) + "\n")


def room(obj):
    r, w = ROOM, WINDOW
    obj.group("room")
    xs = [r["x0"], w["x0"], w["x1"], r["x1"]]
    zs = [r["z0"], w["z0"], w["z1"], r["z1"]]
    # Window wall as a conforming 3 x 3 patch grid with the centre cell open.
    for i in range(3):
        for j in range(3):
            if i == 1 and j == 1:
                continue
            obj.quad((xs[i], 0, zs[j]), (xs[i + 1], 0, zs[j]), (xs[i + 1], 0, zs[j + 1]), (xs[i], 0, zs[j + 1]))
    x0, x1, y1, z0, z1 = r["x0"], r["x1"], r["y1"], r["z0"], r["z1"]
    obj.quad((x0, y1, z0), (x1, y1, z0), (x1, y1, z1), (x0, y1, z1))
    obj.quad((x0, 0, z0), (x0, y1, z0), (x0, y1, z1), (x0, 0, z1))
    obj.quad((x1, 0, z0), (x1, y1, z0), (x1, y1, z1), (x1, 0, z1))
    obj.quad((x0, 0, z0), (x1, 0, z0), (x1, y1, z0), (x0, y1, z0))
    obj.quad((x0, 0, z1), (x1, 0, z1), (x1, y1, z1), (x0, y1, z1))
    obj.group("glazing")
    obj.quad((w["x0"], 0, w["z0"]), (w["x1"], 0, w["z0"]), (w["x1"], 0, w["z1"]), (w["x0"], 0, w["z1"]))


def layer_map(layers):
    w = WINDOW
    return {
        "layers": layers,
        "windows": [
            {
                "boundary": [[w["x0"], 0, w["z0"]], [w["x1"], 0, w["z0"]], [w["x1"], 0, w["z1"]], [w["x0"], 0, w["z1"]]],
                "normal": [0, -1, 0],
                "sill_height_m": w["z0"] - ROOM["z0"],
                "floor_height_m": ROOM["z0"],
            }
        ],
    }


def config(extra=None):
    r = ROOM
    c = {
        "scene": "scene.obj",
        "layer_map": "layers.json",
        "location": {"latitude": 51.92, "longitude": 4.48, "utc_offset": 1, "north_azimuth_in_scene": 0},
        "grid": {
            "room_floor": [[r["x0"], r["y0"], r["z0"]], [r["x1"], r["y0"], r["z0"]],
                           [r["x1"], r["y1"], r["z0"]], [r["x0"], r["y1"], r["z0"]]],
            "spacing_m": 0.5,
            "heights_m": [1.2, 1.7],
        },
        "view": {"icosphere_level": 5, "ring_size": 3600, "thresholds_sr": [0, 0.01, 0.05, 0.1, 0.5],
                 "distance_rule": "min"},
        "sunlight": {"timestep_minutes": 5, "year": 2025},
    }
    if extra:
        c.update(extra)
    return c


def dump(path, data):
    with open(path, "w", newline="\n") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def shoebox():
    os.makedirs("shoebox", exist_ok=True)
    obj = Obj()
    room(obj)
    obj.group("terrain")
    obj.quad((-100, -100, GROUND_Z), (100, -100, GROUND_Z), (100, 100, GROUND_Z), (-100, 100, GROUND_Z))
    obj.group("facade")
    obj.quad((-40, -16, GROUND_Z), (40, -16, GROUND_Z), (40, -16, 4.0), (-40, -16, 4.0))
    obj.write("shoebox/scene.obj", "shoebox room, ground plane, facade slab 16 m south of the window")
    dump("shoebox/layers.json", layer_map({"room": "interior", "glazing": "window", "terrain": "ground",
                                           "facade": "landscape"}))
    dump("shoebox/config.json", config())


def district():
    os.makedirs("district", exist_ok=True)
    obj = Obj()
    room(obj)
    obj.group("terrain")
    obj.grid((-150, -150, GROUND_Z), (300, 0, 0), (0, 300, 0), 24, 24)
    obj.group("buildings")
    obj.box(-30, 10, -45, -28, GROUND_Z, 18, 2.0)   # south block across the street
    obj.box(25, 45, -60, -20, GROUND_Z, 42, 3.0)    # south-east tower
    obj.box(-70, -40, -36, -8, GROUND_Z, 12, 3.0)   # south-west block
    obj.box(-10, 20, 30, 60, GROUND_Z, 25, 3.0)     # north block behind the room
    obj.write("district/scene.obj", "room with a four-building context on a tessellated ground plane")
    dump("district/layers.json", layer_map({"room": "interior", "glazing": "window", "terrain": "ground",
                                            "buildings": "landscape"}))
    dump("district/config.json", config())


if __name__ == "__main__":
    shoebox()
    district()
