"""Signature recovery and statistical detection.

Extraction reads the shared code feature through the shallow decoder
(inference mode: running batch-norm statistics, dropout off) and
thresholds per-bit sigmoids at 0.5. Detection scores the recovered bits
against the owner's signature with a fair-coin z-test.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import EmptyScoresError
from .insertion import ModelBundle, encode_batch, raw_features
from .messages import BitMessage
from .nn import Tensor


@dataclass(frozen=True)
class ExtractionResult:
    bits: BitMessage
    soft: np.ndarray  # per-bit probabilities in (0, 1)


@dataclass(frozen=True)
class DetectionConfig:
    p_null: float = 0.5
    z_threshold: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.p_null < 1.0:
            raise ValueError("p_null must lie strictly between 0 and 1")


@dataclass
class MetricsReport:
    auroc: float
    tpr: float
    fpr: float
    pass_rate: Optional[float] = None

    def to_dict(self):
        out = {"auroc": self.auroc, "tpr": self.tpr, "fpr": self.fpr}
        if self.pass_rate is not None:
            out["pass_rate"] = self.pass_rate
        return out


def extract_soft(tree, model: ModelBundle) -> np.ndarray:
    phi = Tensor(raw_features(tree, model)[None, :])
    feature = encode_batch(phi, model)
    logits = model.extractor.forward(feature, mode="infer")
    return logits.sigmoid().data[0].copy()


def extract(tree, model: ModelBundle) -> ExtractionResult:
    """Recover the embedded signature from (possibly watermarked) code."""
    soft = extract_soft(tree, model)
    bits = BitMessage(tuple(int(p >= 0.5) for p in soft))
    return ExtractionResult(bits=bits, soft=soft)


def z_score(message: BitMessage, recovered: BitMessage,
            cfg: DetectionConfig = DetectionConfig()) -> float:
    """Matched-bit count against the fair-coin null: z = (N - mu) / sigma."""
    if len(message) != len(recovered):
        raise ValueError("message length mismatch")
    n = len(message)
    matches = sum(int(a == b) for a, b in zip(message, recovered))
    mu = n * cfg.p_null
    sigma = math.sqrt(n * cfg.p_null * (1.0 - cfg.p_null))
    return (matches - mu) / sigma


def ber(message: BitMessage, recovered: BitMessage) -> float:
    """Fraction of differing bits."""
    if len(message) != len(recovered):
        raise ValueError("message length mismatch")
    differing = sum(int(a != b) for a, b in zip(message, recovered))
    return differing / len(message)


def detect(tree, message: BitMessage, model: ModelBundle,
           cfg: DetectionConfig = DetectionConfig()) -> dict:
    z = z_score(message, extract(tree, model).bits, cfg)
    return {"is_watermarked": z >= cfg.z_threshold, "z": z}


def roc_metrics(wm_scores: Sequence[float], clean_scores: Sequence[float],
                tau: float) -> MetricsReport:
    """AUROC by the rank statistic (ties count 1/2) plus TPR/FPR at tau."""
    if not wm_scores or not clean_scores:
        raise EmptyScoresError("both score lists must be non-empty")
    wm = np.asarray(wm_scores, dtype=np.float64)
    clean = np.asarray(clean_scores, dtype=np.float64)
    combined = np.concatenate([wm, clean])
    order = np.argsort(combined, kind="mergesort")
    ranks = np.empty_like(combined)
    # average ranks over ties
    sorted_vals = combined[order]
    i = 0
    pos = 1.0
    while i < len(sorted_vals):
        j = i
        while j + 1 < len(sorted_vals) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        avg = (pos + pos + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        pos += j - i + 1
        i = j + 1
    rank_sum = ranks[: len(wm)].sum()
    u = rank_sum - len(wm) * (len(wm) + 1) / 2.0
    auroc = u / (len(wm) * len(clean))
    tpr = float((wm >= tau).mean())
    fpr = float((clean >= tau).mean())
    return MetricsReport(auroc=float(auroc), tpr=tpr, fpr=fpr)


def evaluate_detection(model: ModelBundle, trees, seed: int = 0,
                       cfg: DetectionConfig = DetectionConfig(),
                       task_ids: Optional[List[str]] = None) -> dict:
    """Insert a fresh random message per program, then score extraction.

    Clean (unwatermarked) programs are scored against the same per-record
    message, which realizes the fair-coin null regardless of decoder bias.
    """
    from .errors import CapacityError
    from .insertion import insert
    from .messages import BitMessage

    rng = np.random.default_rng(seed)
    wm_z: List[float] = []
    clean_z: List[float] = []
    records: List[dict] = []
    correct_bits = 0
    total_bits = 0
    for pos, tree in enumerate(trees):
        message = BitMessage.random(rng, model.config.n_bits)
        try:
            wm_tree = insert(tree, message, model).tree
        except CapacityError:
            continue
        recovered = extract(wm_tree, model).bits
        clean_bits = extract(tree, model).bits
        z_wm = z_score(message, recovered, cfg)
        z_cl = z_score(message, clean_bits, cfg)
        wm_z.append(z_wm)
        clean_z.append(z_cl)
        correct_bits += sum(int(a == b) for a, b in zip(message, recovered))
        total_bits += len(message)
        records.append({
            "task_id": task_ids[pos] if task_ids else f"task_{pos:04d}",
            "z": z_wm,
            "ber": ber(message, recovered),
            "is_watermarked": z_wm >= cfg.z_threshold,
        })
    report = roc_metrics(wm_z, clean_z, cfg.z_threshold) if wm_z else None
    return {
        "bit_accuracy": correct_bits / total_bits if total_bits else 0.0,
        "report": report,
        "wm_z": wm_z,
        "clean_z": clean_z,
        "records": records,
    }


def metrics_lines(records: List[dict]) -> str:
    """JSON-lines rendering of per-task detection outcomes."""
    return "\n".join(
        json.dumps(
            {
                "task_id": r["task_id"],
                "z": r["z"],
                "ber": r["ber"],
                "is_watermarked": r["is_watermarked"],
            },
            sort_keys=True,
        )
        for r in records
    )
