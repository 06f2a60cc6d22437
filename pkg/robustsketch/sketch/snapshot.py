"""
스케치 스냅샷 직렬화.

배치 (모두 little-endian):
    magic(4s) version(u16) variant(u8) n(u64) d(u64) b(u64) master_seed(u64)
    counter_kind(u8) counters(d × 8바이트, f8 또는 i8)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from robustsketch.errors import SnapshotFormatError
from robustsketch.models.params import SketchParams
from robustsketch.models.variant import CounterKind, SketchVariant
from robustsketch.sketch.randomness import SketchRandomness, init_sketch
from robustsketch.sketch.state import SketchState

MAGIC = b"RSKS"
VERSION = 1
_HEADER = struct.Struct("<4sHBQQQQB")


@dataclass(frozen=True)
class SnapshotHeader:
    variant: SketchVariant
    params: SketchParams
    master_seed: int
    counter_kind: CounterKind
    version: int = VERSION


def encode_snapshot(rand: SketchRandomness, state: SketchState) -> bytes:
    """(랜덤성, 상태)를 바이트열로 변환"""
    state.check(rand)
    header = _HEADER.pack(MAGIC, VERSION, rand.variant.code, rand.n, rand.d, rand.b,
                          rand.master_seed & ((1 << 64) - 1), state.kind.code)
    return header + state.counters.astype(state.kind.dtype).tobytes()


def decode_snapshot(data: bytes) -> tuple[SnapshotHeader, np.ndarray]:
    """바이트열에서 헤더와 카운터 배열 복원

    Raises:
        SnapshotFormatError: magic/version/길이가 맞지 않을 때
    """
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("스냅샷이 헤더보다 짧습니다.")
    magic, version, variant_code, n, d, b, seed, kind_code = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"magic 값이 다릅니다: {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"지원하지 않는 버전입니다: {version}")
    try:
        variant = SketchVariant.from_code(variant_code)
        kind = CounterKind.from_code(kind_code)
        params = SketchParams(n, d, b)
    except ValueError as exc:
        raise SnapshotFormatError(str(exc)) from exc

    body = data[_HEADER.size:]
    if len(body) != 8 * d:
        raise SnapshotFormatError(f"카운터 길이가 맞지 않습니다 (기대 {8 * d}, 실제 {len(body)}).")
    counters = np.frombuffer(body, dtype=kind.dtype).astype(kind.dtype.lstrip("<"))
    return SnapshotHeader(variant, params, seed, kind, version), counters


def restore(data: bytes) -> tuple[SketchRandomness, SketchState]:
    """스냅샷에서 기본 해시 명세로 랜덤성을 재생성하고 상태를 복원"""
    header, counters = decode_snapshot(data)
    rand = init_sketch(header.variant, header.params, header.master_seed)
    return rand, SketchState(counters, rand.fingerprint)


def save(path: Path | str, rand: SketchRandomness, state: SketchState) -> None:
    Path(path).write_bytes(encode_snapshot(rand, state))


def load(path: Path | str) -> tuple[SketchRandomness, SketchState]:
    return restore(Path(path).read_bytes())
