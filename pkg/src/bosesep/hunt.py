"""Seeded search for PPT states inside the bound-entanglement rank window.

Each trial draws a random symmetric state of the target rank, pushes it
towards the PPT set by alternating projections, and, when the result is
PPT with rank in the window, runs the beyond-PPT detectors.  Flagged
records are *candidates*: a CCNR violation under PPT certifies
entanglement, an extraction failure is only a heuristic hint, and each
record says which of the two fired.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bosonic import first_party_isometry, symmetric_isometry, symmetric_support_residual
from .errors import (
    ExtractionFailed,
    NoConvergence,
    ParseError,
    PreconditionFailed,
    ShapeError,
)
from .formats import HUNT_SCHEMA, state_from_dict, state_to_dict
from .linalg import PSD_SLACK, SystemShape, partial_transpose, rank_from_spectrum
from .separability import (
    CCNR_TOL,
    bound_window,
    ccnr_value,
    extract_certificate,
    ppt_check,
)
from .states import Seed, StateRecord, random_rank_r_symmetric

DETECTORS = ("ccnr", "extraction-failure", "both")
PROJECTION_TOL = 1e-9
VERIFY_TOL = 1e-8

HONESTY_NOTE = (
    "candidate only: a CCNR value above 1 under PPT certifies entanglement; "
    "an extraction failure is a heuristic hint, not a proof"
)


@dataclass(frozen=True)
class HuntConfig:
    shape: SystemShape
    target_rank: int
    trials: int
    master_seed: int
    projection_iters: int = 500
    detector: str = "ccnr"

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        window = bound_window(self.shape)
        if self.target_rank not in window:
            raise ValueError(
                f"target rank {self.target_rank} lies outside the window [{window.lo},{window.hi}]"
            )


@dataclass
class HuntSummary:
    trials: int = 0
    converged: int = 0
    ppt_in_window: int = 0
    flagged: int = 0

    def line(self) -> str:
        return (
            f"trials={self.trials} converged={self.converged} "
            f"ppt_in_window={self.ppt_in_window} flagged={self.flagged}"
        )


def _hermitize(x):
    return 0.5 * (x + x.conj().T)


def _truncate(x, rank):
    w, v = np.linalg.eigh(_hermitize(x))
    w = np.clip(w, 0.0, None)
    w[: max(w.size - rank, 0)] = 0.0
    y = (v * w) @ v.conj().T
    return _hermitize(y / w.sum())


def alternating_projection(rho0: StateRecord, target_rank: int, iters: int = 500,
                           tol: float = PROJECTION_TOL) -> StateRecord:
    """Alternate between rank-``target_rank`` states and the PPT set.

    Step (a) truncates the spectrum to the ``target_rank`` largest
    non-negative eigenvalues; step (b) clips the negative part of the
    partial transpose on party 0 and maps back onto symmetric support.
    Both steps renormalize the trace.  Since (a) enforces the rank and PSD
    constraints exactly, the loop ends as soon as the iterate after (a)
    has a partial transpose with minimum eigenvalue ``>= -tol``.

    Raises
    ------
    NoConvergence
        No PPT iterate within ``iters`` rounds.
    """
    shape = rho0.shape
    iso = symmetric_isometry(shape)
    W = first_party_isometry(shape)
    x = rho0.sym_matrix()
    for it in range(iters):
        y = _truncate(x, target_rank)
        pt = _hermitize(W.conj().T @ partial_transpose(iso.expand(y), shape, [0]) @ W)
        w, v = np.linalg.eigh(pt)
        if w[0] >= -tol:
            provenance = f"{rho0.provenance}; alternating_projection(rank={target_rank}, rounds={it + 1})"
            out = StateRecord(shape, "symmetric", y, provenance)
            return out.in_basis("full" if shape.k <= 3 else "symmetric")
        pt_plus = (v * np.clip(w, 0.0, None)) @ v.conj().T
        back = partial_transpose(W @ pt_plus @ W.conj().T, shape, [0])
        x = _hermitize(iso.compress(back))
        x = x / np.trace(x).real
    raise NoConvergence(f"no PPT iterate after {iters} rounds (last minimum PT eigenvalue {w[0]:.3e})")


def _measure(state: StateRecord) -> dict:
    """The quantities a record stores and ``verify_candidate`` recomputes."""
    k = state.shape.k
    rho = state.sym_matrix()
    rank = rank_from_spectrum(np.linalg.eigvalsh(_hermitize(rho)))
    checks = ppt_check(state)
    return {
        "rank": rank,
        "min_pt_eigenvalues": [c.min_eigenvalue for c in checks],
        "ccnr": [ccnr_value(state, (p,)) for p in range(k)],
        "support_residual": symmetric_support_residual(state.full_matrix(), state.shape),
        "ppt": all(c.passed for c in checks),
    }


def run_trial(config: HuntConfig, index: int) -> Optional[dict]:
    """One trial; ``None`` when the projection did not converge."""
    seed = Seed(config.master_seed, index)
    rho0 = random_rank_r_symmetric(config.shape, config.target_rank, seed, basis="symmetric")
    try:
        state = alternating_projection(rho0, config.target_rank, config.projection_iters)
    except NoConvergence:
        return None
    m = _measure(state)
    window = bound_window(config.shape)
    in_window = m["ppt"] and m["rank"] in window
    extraction = {"status": "not-run"}
    reasons = []
    if in_window:
        if config.detector in ("ccnr", "both") and any(v > 1.0 + CCNR_TOL for v in m["ccnr"]):
            reasons.append("ccnr")
        if config.detector in ("extraction-failure", "both"):
            try:
                cert = extract_certificate(state, seed=seed, force=True)
                extraction = {
                    "status": "succeeded",
                    "terms": len(cert),
                    "trace_distance": float(cert.trace_distance),
                }
            except ExtractionFailed as exc:
                extraction = {"status": "failed", "message": str(exc)}
                reasons.append("extraction-failed")
            except PreconditionFailed as exc:
                extraction = {"status": "refused", "message": str(exc)}
    flagged = bool(reasons)
    return {
        "schema": HUNT_SCHEMA,
        "trial_index": index,
        "seed": {"master": config.master_seed, "stream": index},
        "target_rank": config.target_rank,
        "detector": config.detector,
        "state": state_to_dict(state),
        "rank": m["rank"],
        "min_pt_eigenvalues": m["min_pt_eigenvalues"],
        "ccnr": m["ccnr"],
        "support_residual": m["support_residual"],
        "in_window": bool(in_window),
        "extraction": extraction,
        "flagged": flagged,
        "flag_reasons": reasons,
        "label": "candidate" if flagged else "none",
        "notes": HONESTY_NOTE if flagged else "",
    }


def encode_record(record: dict) -> str:
    return json.dumps(record, allow_nan=False, separators=(",", ":"))


def _trial_job(args):
    config, index = args
    return index, run_trial(config, index)


def run_hunt(config: HuntConfig, sink=None, workers: int = 1):
    """Run every trial and write one JSONL line per converged trial.

    Lines are ordered by ``trial_index`` whatever ``workers`` is, so the
    output is a pure function of ``config``.  Returns ``(summary, records)``.
    """
    indices = range(config.trials)
    if workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_trial_job, [(config, i) for i in indices], chunksize=4))
    else:
        results = dict(_trial_job((config, i)) for i in indices)
    summary = HuntSummary(trials=config.trials)
    records = []
    for i in sorted(results):
        rec = results[i]
        if rec is None:
            continue
        summary.converged += 1
        summary.ppt_in_window += rec["in_window"]
        summary.flagged += rec["flagged"]
        records.append(rec)
        if sink is not None:
            sink.write(encode_record(rec) + "\n")
    return summary, records


class VerifyReport(NamedTuple):
    passed: bool
    mismatches: list


def _close(a, b, tol=VERIFY_TOL):
    return abs(float(a) - float(b)) <= tol


def verify_candidate(record) -> VerifyReport:
    """Recompute a record's numbers from its embedded state and compare.

    Raises
    ------
    ParseError
        The record is not valid JSON or lacks required fields.
    """
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(record, dict) or record.get("schema") != HUNT_SCHEMA:
        raise ParseError("not a hunt-v1 record")
    try:
        state = state_from_dict(record["state"])
        fields = {key: record[key] for key in
                  ("rank", "min_pt_eigenvalues", "ccnr", "support_residual", "flagged", "flag_reasons")}
    except (KeyError, TypeError) as exc:
        raise ParseError(f"record is missing a field: {exc}") from exc

    mismatches = []
    problems = state.problems()
    if problems:
        return VerifyReport(False, [f"state invalid: {p}" for p in problems])
    try:
        m = _measure(state)
    except ShapeError as exc:
        return VerifyReport(False, [f"state unusable: {exc}"])

    if fields["rank"] != m["rank"]:
        mismatches.append(f"rank {fields['rank']} != recomputed {m['rank']}")
    for key in ("min_pt_eigenvalues", "ccnr"):
        got, want = fields[key], m[key]
        if len(got) != len(want) or not all(_close(a, b) for a, b in zip(got, want)):
            mismatches.append(f"{key} {got} != recomputed {want}")
    if not _close(fields["support_residual"], m["support_residual"]):
        mismatches.append(
            f"support_residual {fields['support_residual']} != recomputed {m['support_residual']}"
        )
    if fields["flagged"]:
        if not m["ppt"]:
            mismatches.append("flagged record is not PPT on every single-party cut")
        if "ccnr" in fields["flag_reasons"] and not any(v > 1.0 + CCNR_TOL for v in m["ccnr"]):
            mismatches.append("flagged for ccnr but no cut exceeds 1 + 1e-8")
        if not fields["flag_reasons"]:
            mismatches.append("flagged without a reason")
    return VerifyReport(not mismatches, mismatches)


def config_to_dict(config: HuntConfig) -> dict:
    d = asdict(config)
    d["shape"] = {"n": config.shape.n, "k": config.shape.k}
    return d
