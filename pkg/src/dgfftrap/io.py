"""Serialization of fields, Green tables, atom lists, paths, excursions and
reports.

Binary formats are little-endian with a four-byte magic and a u32 version;
CSV reals are printed with repr() so doubles round-trip exactly.
"""

import csv
import json
import struct

import numpy as np

from .errors import ParseError
from .field import FieldSample
from .kprocess import AtomList
from .lattice import GreenTable
from .walk import PathSample

FIELD_MAGIC = b"DGFF"
GREEN_MAGIC = b"GRNT"
_DOMAIN_TAGS = {"box": 0, "ball": 1}
_DOMAIN_NAMES = {v: k for k, v in _DOMAIN_TAGS.items()}


def _read_exact(fh, count, what):
    buf = fh.read(count)
    if len(buf) != count:
        raise ParseError("truncated %s: expected %d bytes, got %d"
                         % (what, count, len(buf)))
    return buf


def save_field(fld, path):
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<IIQ", 1, fld.n, fld.seed & (2 ** 64 - 1)))
        fh.write(fld.values.astype("<f8").tobytes())


def load_field(path):
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "field header")
        if magic != FIELD_MAGIC:
            raise ParseError("bad magic %r (expected %r)" % (magic, FIELD_MAGIC))
        version, n, seed = struct.unpack("<IIQ", _read_exact(fh, 16,
                                                             "field header"))
        if version != 1:
            raise ParseError("unsupported field version %d" % version)
        raw = _read_exact(fh, 8 * n * n, "field values")
        values = np.frombuffer(raw, dtype="<f8").reshape(n, n).copy()
    return FieldSample(n=n, values=values, seed=seed, method="file")


def save_field_csv(fld, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "h"])
        for x in range(fld.n):
            for y in range(fld.n):
                w.writerow([x, y, repr(float(fld.values[x, y]))])


def save_green(table, path):
    with open(path, "wb") as fh:
        fh.write(GREEN_MAGIC)
        fh.write(struct.pack("<IBdI", 1, _DOMAIN_TAGS[table.domain],
                             table.param, len(table.vertices)))
        fh.write(table.vertices.astype("<i4").tobytes())
        fh.write(table.values.astype("<f8").tobytes())


def load_green(path):
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "green header")
        if magic != GREEN_MAGIC:
            raise ParseError("bad magic %r (expected %r)" % (magic, GREEN_MAGIC))
        version, tag, param, count = struct.unpack(
            "<IBdI", _read_exact(fh, 17, "green header"))
        if version != 1:
            raise ParseError("unsupported green version %d" % version)
        if tag not in _DOMAIN_NAMES:
            raise ParseError("unknown domain tag %d" % tag)
        verts = np.frombuffer(_read_exact(fh, 8 * count, "green vertices"),
                              dtype="<i4").reshape(count, 2).astype(np.int64)
        values = np.frombuffer(
            _read_exact(fh, 8 * count * count, "green values"),
            dtype="<f8").reshape(count, count).copy()
    return GreenTable(domain=_DOMAIN_NAMES[tag], param=param, vertices=verts,
                      values=values)


def save_green_csv(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "y1", "x2", "y2", "value"])
        for i, (x1, y1) in enumerate(table.vertices):
            for j, (x2, y2) in enumerate(table.vertices):
                w.writerow([x1, y1, x2, y2, repr(float(table.values[i, j]))])


def save_atoms_csv(atoms, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi_x", "xi_y", "tau"])
        for (x, y), tau in zip(atoms.locations, atoms.depths):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(tau))])


def load_atoms_csv(path):
    locs, depths = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["xi_x", "xi_y", "tau"]:
            raise ParseError("bad atom CSV header at line 1: %r" % (header,))
        for lineno, row in enumerate(reader, start=2):
            try:
                x, y, tau = (float(v) for v in row)
            except (ValueError, TypeError):
                raise ParseError("malformed atom CSV at line %d" % lineno)
            locs.append((x, y))
            depths.append(tau)
    depths_arr = np.array(depths)
    if len(depths_arr) > 1 and np.any(np.diff(depths_arr) > 0):
        raise ParseError("atom depths must be nonincreasing")
    return AtomList(locations=np.array(locs).reshape(-1, 2),
                    depths=depths_arr)


def save_path_csv(path_sample, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "x", "y"])
        for t, (x, y) in zip(path_sample.times, path_sample.states):
            w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])


def load_path_csv(path, state_space, horizon=None):
    times, states = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["time", "x", "y"]:
            raise ParseError("bad path CSV header at line 1: %r" % (header,))
        for lineno, row in enumerate(reader, start=2):
            try:
                t, x, y = (float(v) for v in row)
            except (ValueError, TypeError):
                raise ParseError("malformed path CSV at line %d" % lineno)
            times.append(t)
            states.append((x, y))
    if horizon is None:
        horizon = times[-1] if times else 0.0
    return PathSample(state_space=state_space, times=np.array(times),
                      states=np.array(states).reshape(-1, 2),
                      horizon=horizon)


def save_landscape_json(landscape, path):
    doc = {
        "n": landscape.n, "r": landscape.r, "m": landscape.m,
        "beta": landscape.beta, "separated": landscape.separated,
        "shortfall": landscape.shortfall, "log_scale": landscape.log_scale,
        "traps": [
            {"x": t.position[0], "y": t.position[1], "depth": t.depth,
             "log_depth": t.log_depth,
             "rescaled_x": landscape.rescaled_atoms[i][0][0],
             "rescaled_y": landscape.rescaled_atoms[i][0][1],
             "rescaled_depth": landscape.rescaled_atoms[i][1]}
            for i, t in enumerate(landscape.traps)],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def save_excursions_jsonl(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps({
                "k": rec.k, "R": rec.r_step, "S": rec.s_step,
                "ordinal": rec.ordinal,
                "local_times": {"%d_%d" % (dy, dx): v
                                for (dx, dy), v in rec.local_times.items()},
            }) + "\n")


def save_report(report, json_path, csv_path=None):
    with open(json_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1, default=str)
    if csv_path:
        import hashlib
        phash = hashlib.sha256(
            json.dumps(report.parameters, sort_keys=True,
                       default=str).encode()).hexdigest()[:12]
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["experiment", "parameter_hash", "statistic",
                        "pvalue", "verdict"])
            for key, verdict in report.verdicts.items():
                w.writerow([report.name, phash, key,
                            report.p_values.get(key, ""), verdict])
