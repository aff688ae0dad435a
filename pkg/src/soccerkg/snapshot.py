"""Versioned binary snapshot of a frozen :class:`~soccerkg.graph.Graph`.

Layout (all integers little-endian)::

    magic      4 bytes  b"KGF1"
    version    u16
    flags      u16      bit 0: frozen
    section*   u8 tag, u32 length, payload       (tags 1=strings 2=nodes 3=edges)
    crc32      u32      over every preceding byte

strings:  u32 count, then (u32 len, utf-8 bytes) per entry
nodes:    u32 count, then (u32 label_str, props) per node
edges:    u32 count, then (u32 src, u32 dst, u32 type_str, props) per edge
props:    u16 count, then (u32 key_str, u8 tag, value) per entry;
          tag 1 text (u32 str), 2 int (i64), 3 float (f64), 4 bool (u8)

Node and edge ids are implicit in table order, so a round trip keeps them.
"""

from __future__ import annotations

import struct
import zlib
from typing import BinaryIO

from .graph import Graph, GraphError

MAGIC = b"KGF1"
VERSION = 1

_SEC_STRINGS, _SEC_NODES, _SEC_EDGES = 1, 2, 3
_TAG_TEXT, _TAG_INT, _TAG_FLOAT, _TAG_BOOL = 1, 2, 3, 4


class FormatError(GraphError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class VersionError(GraphError):
    pass


class _StringPool:
    def __init__(self) -> None:
        self.index: dict[str, int] = {}

    def __call__(self, s: str) -> int:
        if s not in self.index:
            self.index[s] = len(self.index)
        return self.index[s]


def _pack_props(props, pool: _StringPool, out: bytearray) -> None:
    out += struct.pack("<H", len(props))
    for k, v in props.items():
        out += struct.pack("<I", pool(k))
        if isinstance(v, bool):
            out += struct.pack("<BB", _TAG_BOOL, int(v))
        elif isinstance(v, int):
            out += struct.pack("<Bq", _TAG_INT, v)
        elif isinstance(v, float):
            out += struct.pack("<Bd", _TAG_FLOAT, v)
        else:
            out += struct.pack("<BI", _TAG_TEXT, pool(v))


def dumps(g: Graph) -> bytes:
    if not g.frozen:
        raise GraphError("only frozen graphs can be saved")
    pool = _StringPool()
    nodes = bytearray(struct.pack("<I", g.num_nodes()))
    for n in g.nodes:
        nodes += struct.pack("<I", pool(n.label))
        _pack_props(n.props, pool, nodes)
    edges = bytearray(struct.pack("<I", g.num_edges()))
    for e in g.edges:
        edges += struct.pack("<III", e.src, e.dst, pool(e.etype))
        _pack_props(e.props, pool, edges)
    strings = bytearray(struct.pack("<I", len(pool.index)))
    for s in pool.index:
        raw = s.encode("utf-8")
        strings += struct.pack("<I", len(raw)) + raw

    out = bytearray(MAGIC + struct.pack("<HH", VERSION, 1 if g.frozen else 0))
    for tag, payload in ((_SEC_STRINGS, strings), (_SEC_NODES, nodes), (_SEC_EDGES, edges)):
        out += struct.pack("<BI", tag, len(payload)) + payload
    out += struct.pack("<I", zlib.crc32(out))
    return bytes(out)


def save(g: Graph, sink: BinaryIO) -> None:
    sink.write(dumps(g))


class _Reader:
    def __init__(self, data: bytes, start: int = 0, end: int | None = None):
        self.data = data
        self.pos = start
        self.end = len(data) if end is None else end

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > self.end:
            raise FormatError(f"truncated: needed {size} bytes", self.pos)
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def raw(self, size: int) -> bytes:
        if self.pos + size > self.end:
            raise FormatError(f"truncated: needed {size} bytes", self.pos)
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk


def _read_props(r: _Reader, strings: list[str]) -> dict:
    (count,) = r.take("<H")
    props = {}
    for _ in range(count):
        at = r.pos
        (key_idx, tag) = r.take("<IB")
        key = _lookup(strings, key_idx, at)
        if tag == _TAG_TEXT:
            at = r.pos
            props[key] = _lookup(strings, r.take("<I")[0], at)
        elif tag == _TAG_INT:
            props[key] = r.take("<q")[0]
        elif tag == _TAG_FLOAT:
            props[key] = r.take("<d")[0]
        elif tag == _TAG_BOOL:
            props[key] = bool(r.take("<B")[0])
        else:
            raise FormatError(f"unknown value tag {tag}", r.pos - 1)
    return props


def _lookup(strings: list[str], idx: int, at: int) -> str:
    if idx >= len(strings):
        raise FormatError(f"string index {idx} out of range", at)
    return strings[idx]


def loads(data: bytes) -> Graph:
    r = _Reader(data)
    if r.raw(4) != MAGIC:
        raise FormatError("bad magic", 0)
    version, flags = r.take("<HH")
    if version != VERSION:
        raise VersionError(f"snapshot version {version} is not supported (expected {VERSION})")
    if len(data) < r.pos + 4:
        raise FormatError("truncated: missing checksum", len(data))
    body_end = len(data) - 4
    (crc,) = struct.unpack_from("<I", data, body_end)

    sections: dict[int, tuple[int, int]] = {}
    r.end = body_end
    while r.pos < body_end:
        at = r.pos
        tag, length = r.take("<BI")
        if tag in sections or tag not in (_SEC_STRINGS, _SEC_NODES, _SEC_EDGES):
            raise FormatError(f"unexpected section tag {tag}", at)
        if r.pos + length > body_end:
            raise FormatError("truncated section", r.pos)
        sections[tag] = (r.pos, r.pos + length)
        r.pos += length
    if zlib.crc32(data[:body_end]) != crc:
        raise FormatError("checksum mismatch", body_end)
    for tag in (_SEC_STRINGS, _SEC_NODES, _SEC_EDGES):
        if tag not in sections:
            raise FormatError(f"missing section {tag}", body_end)

    sr = _Reader(data, *sections[_SEC_STRINGS])
    strings = []
    for _ in range(sr.take("<I")[0]):
        at = sr.pos
        raw = sr.raw(sr.take("<I")[0])
        try:
            strings.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise FormatError("invalid utf-8 in string pool", at) from None

    g = Graph()
    nr = _Reader(data, *sections[_SEC_NODES])
    for _ in range(nr.take("<I")[0]):
        at = nr.pos
        label = _lookup(strings, nr.take("<I")[0], at)
        g.add_node(label, _read_props(nr, strings))
    er = _Reader(data, *sections[_SEC_EDGES])
    for _ in range(er.take("<I")[0]):
        at = er.pos
        src, dst, type_idx = er.take("<III")
        if not (g.has_node(src) and g.has_node(dst)):
            raise FormatError(f"edge endpoint out of range ({src}, {dst})", at)
        g.add_edge(src, dst, _lookup(strings, type_idx, at + 8), _read_props(er, strings))
    for rd, name in ((nr, "node"), (er, "edge")):
        if rd.pos != rd.end:
            raise FormatError(f"trailing bytes in {name} table", rd.pos)
    if flags & 1:
        g.freeze()
    return g


def load(source: BinaryIO) -> Graph:
    return loads(source.read())
