"""PLY reading and writing (ASCII and binary little endian).

Reading keeps vertex coordinates and triangulated faces and skips any
other properties without reordering; writing emits double-precision
coordinates so a write/read round trip preserves values bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CountMismatch, MalformedHeader, UnsupportedFormat

_SCALAR_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass
class _Element:
    name: str
    count: int
    # Each property: ("scalar", dtype, name) or ("list", count_dtype, item_dtype, name)
    properties: list = field(default_factory=list)


@dataclass
class PlyDocument:
    """Vertex coordinates, optional triangle faces, optional extra
    per-vertex scalar channels (written but not read back)."""

    vertices: np.ndarray
    faces: np.ndarray | None = None
    scalars: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        if self.faces is not None:
            self.faces = np.asarray(self.faces, dtype=int).reshape(-1, 3)


def _parse_header(text: str) -> tuple[str, list[_Element]]:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "ply":
        raise MalformedHeader("file does not start with 'ply'")
    if len(lines) < 2 or not lines[1].startswith("format"):
        raise MalformedHeader("missing format line")
    fmt_parts = lines[1].split()
    if len(fmt_parts) != 3:
        raise MalformedHeader(f"bad format line: {lines[1]!r}")
    fmt = fmt_parts[1]
    if fmt == "binary_big_endian":
        raise UnsupportedFormat("binary big endian PLY is not supported")
    if fmt not in ("ascii", "binary_little_endian"):
        raise MalformedHeader(f"unknown format {fmt!r}")

    elements: list[_Element] = []
    for line in lines[2:]:
        parts = line.split()
        keyword = parts[0]
        if keyword in ("comment", "obj_info"):
            continue
        if keyword == "element":
            if len(parts) != 3:
                raise MalformedHeader(f"bad element line: {line!r}")
            try:
                count = int(parts[2])
            except ValueError:
                raise MalformedHeader(f"bad element count: {line!r}") from None
            if count < 0:
                raise MalformedHeader(f"negative element count: {line!r}")
            elements.append(_Element(parts[1], count))
        elif keyword == "property":
            if not elements:
                raise MalformedHeader("property declared before any element")
            if len(parts) >= 2 and parts[1] == "list":
                if len(parts) != 5:
                    raise MalformedHeader(f"bad list property: {line!r}")
                ctype, itype, name = parts[2], parts[3], parts[4]
                if ctype not in _SCALAR_TYPES or itype not in _SCALAR_TYPES:
                    raise MalformedHeader(f"unknown property type in: {line!r}")
                elements[-1].properties.append(
                    ("list", _SCALAR_TYPES[ctype], _SCALAR_TYPES[itype], name)
                )
            else:
                if len(parts) != 3:
                    raise MalformedHeader(f"bad property line: {line!r}")
                if parts[1] not in _SCALAR_TYPES:
                    raise MalformedHeader(f"unknown property type {parts[1]!r}")
                elements[-1].properties.append(("scalar", _SCALAR_TYPES[parts[1]], parts[2]))
        else:
            raise MalformedHeader(f"unknown header keyword {keyword!r}")
    for el in elements:
        if not el.properties:
            raise MalformedHeader(f"element {el.name!r} has no properties")
    return fmt, elements


def _read_ascii_body(body: bytes, elements: list[_Element]) -> dict:
    tokens = body.decode("ascii", errors="replace").split()
    pos = 0

    def take(n: int) -> list[str]:
        nonlocal pos
        if pos + n > len(tokens):
            raise CountMismatch("file ends before all declared elements are read")
        out = tokens[pos:pos + n]
        pos += n
        return out

    parsed: dict = {}
    for el in elements:
        rows = []
        for _ in range(el.count):
            row = {}
            for prop in el.properties:
                if prop[0] == "scalar":
                    tok = take(1)[0]
                    try:
                        row[prop[2]] = float(tok)
                    except ValueError:
                        raise CountMismatch(f"unparseable value {tok!r}") from None
                else:
                    try:
                        n = int(take(1)[0])
                        row[prop[3]] = [float(t) for t in take(n)]
                    except ValueError:
                        raise CountMismatch("unparseable list entry") from None
            rows.append(row)
        parsed[el.name] = rows
    if pos != len(tokens):
        raise CountMismatch(f"{len(tokens) - pos} extra tokens after final element")
    return parsed


def _read_binary_body(body: bytes, elements: list[_Element]) -> dict:
    offset = 0
    parsed: dict = {}
    for el in elements:
        fixed = all(p[0] == "scalar" for p in el.properties)
        if fixed:
            dt = np.dtype([(p[2], "<" + p[1]) for p in el.properties])
            need = dt.itemsize * el.count
            if offset + need > len(body):
                raise CountMismatch(f"element {el.name!r} truncated")
            arr = np.frombuffer(body, dtype=dt, count=el.count, offset=offset)
            offset += need
            parsed[el.name] = arr
        else:
            rows = []
            for _ in range(el.count):
                row = {}
                for prop in el.properties:
                    if prop[0] == "scalar":
                        dt = np.dtype("<" + prop[1])
                        if offset + dt.itemsize > len(body):
                            raise CountMismatch(f"element {el.name!r} truncated")
                        row[prop[2]] = body[offset:offset + dt.itemsize]
                        row[prop[2]] = float(np.frombuffer(row[prop[2]], dtype=dt)[0])
                        offset += dt.itemsize
                    else:
                        cdt = np.dtype("<" + prop[1])
                        idt = np.dtype("<" + prop[2])
                        if offset + cdt.itemsize > len(body):
                            raise CountMismatch(f"element {el.name!r} truncated")
                        n = int(np.frombuffer(body, dtype=cdt, count=1, offset=offset)[0])
                        offset += cdt.itemsize
                        need = idt.itemsize * n
                        if offset + need > len(body):
                            raise CountMismatch(f"element {el.name!r} truncated")
                        row[prop[3]] = np.frombuffer(
                            body, dtype=idt, count=n, offset=offset
                        ).tolist()
                        offset += need
                rows.append(row)
            parsed[el.name] = rows
    if offset != len(body):
        raise CountMismatch(f"{len(body) - offset} trailing bytes after final element")
    return parsed


def read_ply(path) -> PlyDocument:
    with open(path, "rb") as f:
        data = f.read()
    marker = data.find(b"end_header")
    if marker < 0:
        raise MalformedHeader("no end_header line")
    newline = data.find(b"\n", marker)
    if newline < 0:
        raise MalformedHeader("no newline after end_header")
    try:
        header_text = data[:marker].decode("ascii")
    except UnicodeDecodeError:
        raise MalformedHeader("header is not ASCII") from None
    fmt, elements = _parse_header(header_text)
    body = data[newline + 1:]

    if fmt == "ascii":
        parsed = _read_ascii_body(body, elements)
    else:
        parsed = _read_binary_body(body, elements)

    vertex_el = next((el for el in elements if el.name == "vertex"), None)
    if vertex_el is None:
        raise MalformedHeader("no vertex element")
    names = [p[2] for p in vertex_el.properties if p[0] == "scalar"]
    if not all(axis in names for axis in ("x", "y", "z")):
        raise MalformedHeader("vertex element lacks x, y, z properties")
    rows = parsed["vertex"]
    if isinstance(rows, np.ndarray):
        vertices = np.column_stack([rows[axis].astype(float) for axis in ("x", "y", "z")])
    else:
        vertices = np.array([[r["x"], r["y"], r["z"]] for r in rows], dtype=float)
    vertices = vertices.reshape(-1, 3)

    faces = None
    face_el = next((el for el in elements if el.name == "face"), None)
    if face_el is not None:
        list_props = [p for p in face_el.properties if p[0] == "list"]
        if not list_props:
            raise MalformedHeader("face element lacks a list property")
        key = list_props[0][3]
        tris = []
        for row in parsed["face"]:
            idx = [int(v) for v in row[key]]
            if len(idx) < 3:
                raise CountMismatch(f"face with {len(idx)} indices")
            for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                tris.append((idx[0], idx[k], idx[k + 1]))
        faces = np.array(tris, dtype=int).reshape(-1, 3)
    return PlyDocument(vertices=vertices, faces=faces)


def write_ply(doc: PlyDocument, path, binary: bool = False) -> None:
    scalars = {name: np.asarray(v, dtype=float).reshape(-1) for name, v in doc.scalars.items()}
    for name, v in scalars.items():
        if v.shape[0] != doc.vertices.shape[0]:
            raise ValueError(f"scalar channel {name!r} length mismatch")
    n_vert = doc.vertices.shape[0]
    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {n_vert}")
    header += [f"property double {axis}" for axis in ("x", "y", "z")]
    header += [f"property double {name}" for name in scalars]
    if doc.faces is not None:
        header.append(f"element face {doc.faces.shape[0]}")
        header.append("property list uchar int vertex_indices")
    header.append("end_header")

    columns = [doc.vertices[:, k] for k in range(3)] + list(scalars.values())
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            dt = np.dtype([(f"c{k}", "<f8") for k in range(len(columns))])
            block = np.empty(n_vert, dtype=dt)
            for k, col in enumerate(columns):
                block[f"c{k}"] = col
            f.write(block.tobytes())
            if doc.faces is not None:
                fdt = np.dtype([("n", "u1"), ("a", "<i4"), ("b", "<i4"), ("c", "<i4")])
                fblock = np.empty(doc.faces.shape[0], dtype=fdt)
                fblock["n"] = 3
                fblock["a"], fblock["b"], fblock["c"] = (doc.faces[:, k] for k in range(3))
                f.write(fblock.tobytes())
        else:
            for row in zip(*columns) if columns else []:
                f.write((" ".join(repr(float(x)) for x in row) + "\n").encode("ascii"))
            if doc.faces is not None:
                for a, b, c in doc.faces:
                    f.write(f"3 {a} {b} {c}\n".encode("ascii"))
