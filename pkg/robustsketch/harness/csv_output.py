"""실험 결과 CSV

첫 줄은 스키마 이름과 버전을 담은 주석, 그다음 열 이름과 행.
실수는 항상 같은 형식으로 써서 같은 설정이면 바이트 단위로 같은 파일이 나오게 함.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

HEADER_PREFIX = "# robustsketch"
FLOAT_FORMAT = ".10g"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, FLOAT_FORMAT)
    if hasattr(value, "item"):
        # numpy 스칼라
        return format_value(value.item())
    return str(value)


def header_line(schema: str, version: int, meta: Mapping[str, Any]) -> str:
    parts = [HEADER_PREFIX, f"schema={schema}", f"version={version}"]
    parts.extend(f"{key}={format_value(value)}" for key, value in meta.items())
    return " ".join(parts)


def parse_header(line: str) -> dict[str, str]:
    """header_line의 역. 'schema', 'version'과 메타 값을 문자열로 돌려줌"""
    if not line.startswith(HEADER_PREFIX):
        raise ValueError("robustsketch CSV 헤더가 아닙니다.")
    pairs = line[len(HEADER_PREFIX):].split()
    return dict(pair.split("=", 1) for pair in pairs)


@dataclass
class CsvTable:
    """스키마가 고정된 CSV 표

    Attributes:
        schema (str): 스키마 이름 (보통 실험 이름)
        version (int): 스키마 버전. 열이 바뀌면 올림
        columns (tuple[str, ...]): 열 이름
        meta (dict): 헤더 주석에 쓸 설정 값
        rows (list[dict]): 행
    """

    schema: str
    version: int
    columns: tuple[str, ...]
    meta: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)

    def add(self, row: Mapping[str, Any]) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"알 수 없는 열: {sorted(unknown)}")
        self.rows.append(dict(row))

    def extend(self, rows: Iterable[Mapping[str, Any]]) -> None:
        for row in rows:
            self.add(row)

    def column(self, name: str) -> list[Any]:
        return [row.get(name) for row in self.rows]

    def dumps(self) -> str:
        buffer = io.StringIO()
        buffer.write(header_line(self.schema, self.version, self.meta) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row.get(c)) for c in self.columns])
        return buffer.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path


def read_table(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """CSV를 (헤더 메타, 행 목록)으로 읽음. 값은 문자열 그대로"""
    with open(path, encoding="utf-8", newline="") as f:
        meta = parse_header(f.readline().rstrip("\n"))
        return meta, list(csv.DictReader(f))
