"""Survey driver: squarefree streams, per-field torsion records, frequency
aggregation against the heuristic averages, checkpointed resumable runs, and
CSV/JSON artifacts.

Per-field work items are independent; a worker pool (size from the
PADIC_TORSION_THREADS environment variable, default the CPU count) computes
records out of order but they are merged back in stream order, so output
artifacts are byte-identical regardless of worker count or interruption.
"""

from __future__ import annotations

import json
import multiprocessing
import os
from dataclasses import asdict, dataclass
from pathlib import Path

from .heuristics import cl_average
from .quadfield import make_field
from .rayclass import NoStabilization, torsion_structure

_BLOCK = 1 << 16


class SurveyAborted(RuntimeError):
    """Raised by the test hook that simulates a crash between checkpoints."""


def _squarefree_flags(lo: int, hi: int) -> bytearray:
    """flags[i] = 1 iff lo + i is squarefree, for lo >= 0."""
    flags = bytearray([1]) * (hi - lo)
    p = 2
    while p * p < hi:
        q = p * p
        start = ((lo + q - 1) // q) * q
        for mult in range(start, hi, q):
            flags[mult - lo] = 0
        p += 1
    return flags


def squarefree_stream(d_min: int, d_max: int, sign: str):
    """Squarefree integers of the requested sign in [d_min, d_max], ascending
    by absolute value (0 and 1 are never field discriminant sources)."""
    if sign not in ("real", "imaginary"):
        raise ValueError(f"unknown sign {sign!r}")
    if sign == "real":
        lo, hi = max(d_min, 2), d_max + 1
        if lo >= hi:
            return
        for blo in range(lo, hi, _BLOCK):
            bhi = min(blo + _BLOCK, hi)
            flags = _squarefree_flags(blo, bhi)
            for i in range(bhi - blo):
                if flags[i]:
                    yield blo + i
    else:
        lo, hi = max(-d_max, 1), -d_min + 1
        if lo >= hi:
            return
        for blo in range(lo, hi, _BLOCK):
            bhi = min(blo + _BLOCK, hi)
            flags = _squarefree_flags(blo, bhi)
            for i in range(bhi - blo):
                if flags[i]:
                    yield -(blo + i)


@dataclass
class SurveyConfig:
    p: int
    d_min: int
    d_max: int
    sign: str  # "real" | "imaginary"
    exclude_6_mod_9: bool = False
    n_max: int = 30
    checkpoint_every: int = 500
    out_dir: str | None = None

    def __post_init__(self):
        if self.d_min > self.d_max:
            raise ValueError("empty d range")
        if self.sign == "real" and self.d_max < 2:
            raise ValueError("real survey needs positive d in range")
        if self.sign == "imaginary" and self.d_min > -2:
            raise ValueError("imaginary survey needs negative d in range")
        if self.sign not in ("real", "imaginary"):
            raise ValueError(f"unknown sign {self.sign!r}")

    def fingerprint(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "d_min": self.d_min,
                "d_max": self.d_max,
                "sign": self.sign,
                "exclude_6_mod_9": self.exclude_6_mod_9,
                "n_max": self.n_max,
            },
            sort_keys=True,
        )


@dataclass
class FrequencyRow:
    p: int
    N: int
    count_total: int
    count_nontrivial: int
    f_exp: float | None
    M: float
    delta: float | None


def survey_field(d: int, p: int, n_max: int) -> dict:
    """One survey work item; never raises, failures land in the record."""
    try:
        K = make_field(d)
        rep = torsion_structure(K, p, n_max=n_max)
        t = list(rep.torsion)
        return {
            "d": d,
            "torsion": t,
            "nontrivial": bool(t),
            "stabilization_level": rep.stabilization_level,
            "leopoldt_certified": rep.leopoldt_certified,
            "error": None,
        }
    except NoStabilization:
        return {
            "d": d,
            "torsion": None,
            "nontrivial": None,
            "stabilization_level": None,
            "leopoldt_certified": False,
            "error": "NoStabilization",
        }
    except Exception as exc:  # pragma: no cover - defensive
        return {
            "d": d,
            "torsion": None,
            "nontrivial": None,
            "stabilization_level": None,
            "leopoldt_certified": False,
            "error": f"{type(exc).__name__}: {exc}",
        }


def _survey_field_star(args) -> dict:
    return survey_field(*args)


def worker_count() -> int:
    env = os.environ.get("PADIC_TORSION_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_checkpoint(path: Path, fingerprint: str, records: list[dict]):
    _atomic_write(path, json.dumps({"fingerprint": fingerprint, "records": records}))


def _load_checkpoint(path: Path, fingerprint: str) -> list[dict]:
    if not path.exists():
        return []
    try:
        data = json.loads(path.read_text())
    except (json.JSONDecodeError, OSError):
        return []
    if data.get("fingerprint") != fingerprint:
        return []
    return data.get("records", [])


def run_survey(cfg: SurveyConfig, _abort_after_checkpoints: int | None = None):
    """Run the survey; returns (FrequencyRow, records).

    With out_dir set, writes fields.csv plus the summary table artifacts and
    keeps a checkpoint every cfg.checkpoint_every fields; an interrupted run
    resumes from the checkpoint and produces byte-identical artifacts.
    """
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    ckpt = out_dir / "checkpoint.json" if out_dir else None
    fp = cfg.fingerprint()

    ds = [
        d
        for d in squarefree_stream(cfg.d_min, cfg.d_max, cfg.sign)
        if not (cfg.exclude_6_mod_9 and d % 9 == 6)
    ]
    records: list[dict] = []
    if ckpt is not None:
        records = _load_checkpoint(ckpt, fp)
        records = records[: len(ds)]
        if [r["d"] for r in records] != ds[: len(records)]:
            records = []

    todo = ds[len(records) :]
    nworkers = worker_count()
    checkpoints_written = 0

    def flush_checkpoint():
        nonlocal checkpoints_written
        if ckpt is not None:
            if out_dir is not None:
                out_dir.mkdir(parents=True, exist_ok=True)
            _write_checkpoint(ckpt, fp, records)
            checkpoints_written += 1
            if (
                _abort_after_checkpoints is not None
                and checkpoints_written >= _abort_after_checkpoints
            ):
                raise SurveyAborted(f"aborted after {checkpoints_written} checkpoints")

    tasks = ((d, cfg.p, cfg.n_max) for d in todo)
    if nworkers > 1 and len(todo) > 1:
        with multiprocessing.Pool(nworkers) as pool:
            for rec in pool.imap(_survey_field_star, tasks, chunksize=8):
                records.append(rec)
                if len(records) % cfg.checkpoint_every == 0:
                    flush_checkpoint()
    else:
        for t in tasks:
            records.append(_survey_field_star(t))
            if len(records) % cfg.checkpoint_every == 0:
                flush_checkpoint()

    row = summarize(cfg, records)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(out_dir / "fields.csv", fields_csv(records))
        emit_table([row], out_dir / "summary.csv", out_dir / "summary.json")
        if ckpt is not None and ckpt.exists():
            ckpt.unlink()
    return row, records


def summarize(cfg: SurveyConfig, records: list[dict]) -> FrequencyRow:
    ok = [r for r in records if r["error"] is None]
    total = len(ok)
    nontrivial = sum(1 for r in ok if r["nontrivial"])
    M = cl_average(cfg.p, u=0 if cfg.sign == "real" else 1)
    f_exp = nontrivial / total if total else None
    delta = abs(f_exp - M) / M if f_exp is not None else None
    return FrequencyRow(
        p=cfg.p,
        N=max(abs(cfg.d_min), abs(cfg.d_max)),
        count_total=total,
        count_nontrivial=nontrivial,
        f_exp=f_exp,
        M=M,
        delta=delta,
    )


def fields_csv(records: list[dict]) -> str:
    lines = ["d,nontrivial,torsion,stabilization_level,leopoldt_certified,error"]
    for r in records:
        torsion = "x".join(str(a) for a in r["torsion"]) if r["torsion"] else ""
        nt = "" if r["nontrivial"] is None else int(r["nontrivial"])
        sl = "" if r["stabilization_level"] is None else r["stabilization_level"]
        err = r["error"] or ""
        lines.append(f"{r['d']},{nt},{torsion},{sl},{int(r['leopoldt_certified'])},{err}")
    return "\n".join(lines) + "\n"


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.5f}"


def emit_table(rows: list[FrequencyRow], csv_path, json_path):
    """Summary table artifacts: CSV with the paper's column layout
    (p, M, f_exp, delta; '.' decimal separator, 5 decimals) and a JSON file
    with the full rows.  Returns the two paths."""
    csv_path, json_path = Path(csv_path), Path(json_path)
    lines = ["p,M,f_exp,delta"]
    for r in rows:
        lines.append(f"{r.p},{_fmt(r.M)},{_fmt(r.f_exp)},{_fmt(r.delta)}")
    _atomic_write(csv_path, "\n".join(lines) + "\n")
    _atomic_write(json_path, json.dumps([asdict(r) for r in rows], indent=2) + "\n")
    return csv_path, json_path


def load_table(json_path) -> list[FrequencyRow]:
    data = json.loads(Path(json_path).read_text())
    return [FrequencyRow(**row) for row in data]
