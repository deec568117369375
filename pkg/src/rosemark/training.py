"""Joint end-to-end training of the insertion/extraction bundle.

Total objective: w_f * functionality + w_d * detectability + w_r *
robustness. Executing transformations is non-differentiable, so
learning flows through the feature approximator: the argmax plan, the
watermarked program's raw features, and the hard-extracted targets are
frozen per step, and gradients stop at them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyCorpusError
from .extraction import DetectionConfig, evaluate_detection
from .insertion import (
    ModelBundle,
    ModelConfig,
    SiteDistributions,
    approximate_batch,
    build_plan,
    check_capacity,
    distributions_batch,
    encode_batch,
    perturb_batch,
    raw_features,
    site_masks,
)
from .messages import BitMessage
from .nn import AdamW, Tensor, bce, mse
from .syntax import parse
from .transforms import apply_plan, site_index
from .transforms.vocab import default_vocab


@dataclass(frozen=True)
class TrainConfig:
    w_f: float = 1.0
    w_d: float = 1.0
    w_r: float = 0.05
    epochs: int = 20
    batch_size: int = 16
    lr: float = 1e-3  # desk-scale default; the large-scale reference uses 5e-5
    sigma_p: float = 0.1
    n_bits: int = 4
    seed: int = 0
    weight_decay: float = 0.0

    def __post_init__(self):
        if min(self.w_f, self.w_d, self.w_r) < 0:
            raise ValueError("loss weights must be non-negative")


@dataclass
class LossBreakdown:
    step: int
    l_f: float
    l_d: float
    l_r: float
    total: float

    def to_json(self) -> str:
        return json.dumps(
            {"step": self.step, "l_f": self.l_f, "l_d": self.l_d,
             "l_r": self.l_r, "total": self.total},
            sort_keys=True,
        )


# --- spec-level loss operations ---------------------------------------------------


def detectability_loss(message, soft_recovered) -> Tensor:
    """BCE between the owner's bits and soft recovered bits."""
    target = message.to_array() if isinstance(message, BitMessage) else message
    return bce(soft_recovered, target)


def robustness_loss(message, soft_recovered_adversarial) -> Tensor:
    """BCE against bits recovered from the perturbed distributions."""
    target = message.to_array() if isinstance(message, BitMessage) else message
    return bce(soft_recovered_adversarial, target)


def functionality_loss(tree, message: BitMessage, model: ModelBundle,
                       rng=None) -> Tensor:
    """Feature-approximation MSE plus extraction-consistency BCE for one
    program (training-path semantics, batch of one)."""
    rng = rng or np.random.default_rng(0)
    batch = _prepare(model, [_ProgramEntry.build(tree, model)],
                     np.asarray([message.to_array()]), sigma_p=0.0, rng=rng)
    parts = _losses(model, batch, sigma_p=0.0,
                    dropout_seed=0, update_stats=False)
    return parts["l_f"]


# --- batched machinery --------------------------------------------------------------


@dataclass
class _ProgramEntry:
    tree: object
    index: object
    phi: np.ndarray
    mask: np.ndarray

    @staticmethod
    def build(tree, model: ModelBundle) -> "_ProgramEntry":
        index = site_index(tree, model.vocab)
        phi = raw_features(tree, model, index)
        mask, _, _ = site_masks(index, model.config)
        return _ProgramEntry(tree=tree, index=index, phi=phi, mask=mask)


@dataclass
class _Batch:
    entries: List[_ProgramEntry]
    msgs: np.ndarray  # (B, n_bits) float
    phi_wm: np.ndarray  # (B, raw) frozen watermarked features
    m_hard: np.ndarray  # (B, n_bits) frozen hard-extracted targets
    syn_noise: Optional[np.ndarray]
    var_noise: Optional[np.ndarray]
    phi_wm_hat: Optional[np.ndarray] = None  # executed adversarial variant


def _snapshot_dists(entry: _ProgramEntry, p_syn_row: np.ndarray,
                    p_var_row: np.ndarray, cfg: ModelConfig) -> SiteDistributions:
    from .transforms import Family

    syn_sites = [s for s in entry.index.sites if s.family != Family.VARIABLE_RENAME]
    rename_sites = [s for s in entry.index.sites if s.family == Family.VARIABLE_RENAME]
    syn_sites = syn_sites[: cfg.max_sites]
    p_syn = []
    for row, site in enumerate(syn_sites):
        probs = p_syn_row[row, list(site.alternatives)].astype(np.float64)
        p_syn.append(probs / max(probs.sum(), 1e-12))
    return SiteDistributions(
        p_syn=p_syn,
        p_var=p_var_row.copy(),
        syn_site_ids=tuple(s.id for s in syn_sites),
        rename_site_ids=tuple(s.id for s in rename_sites),
        syn_alternatives=tuple(tuple(s.alternatives) for s in syn_sites),
    )


def _executed_features(model, entries, p_syn_data, p_var_data) -> np.ndarray:
    cfg = model.config
    rows = []
    for b, entry in enumerate(entries):
        dists = _snapshot_dists(entry, p_syn_data[b], p_var_data[b], cfg)
        plan = build_plan(entry.tree, dists, entry.index, model)
        wm_tree = apply_plan(entry.tree, plan, model.vocab)
        rows.append(raw_features(wm_tree, model))
    return np.stack(rows)


def _prepare(model: ModelBundle, entries: List[_ProgramEntry], msgs: np.ndarray,
             sigma_p: float, rng) -> _Batch:
    """Run the non-differentiable path and freeze its outputs: the argmax
    plan's executed features, the adversarial variant's executed features,
    and the hard-extracted targets."""
    phi = Tensor(np.stack([e.phi for e in entries]))
    masks = np.stack([e.mask for e in entries])
    msg_t = Tensor(msgs.astype(np.float32))
    _, p_syn, p_var = distributions_batch(phi, msg_t, masks, model)

    phi_wm = _executed_features(model, entries, p_syn.data, p_var.data)
    f_wm = encode_batch(Tensor(phi_wm), model)
    logits = model.extractor.forward(Tensor(f_wm.data.copy()), mode="infer")
    m_hard = (logits.sigmoid().data >= 0.5).astype(np.float32)

    syn_noise = var_noise = phi_wm_hat = None
    if sigma_p > 0.0:
        syn_noise = (rng.normal(0.0, sigma_p, size=p_syn.data.shape) * masks).astype(
            np.float32
        )
        var_noise = rng.normal(0.0, sigma_p, size=p_var.data.shape).astype(np.float32)
        batch_stub = _Batch(entries, msgs, phi_wm, m_hard, syn_noise, var_noise)
        p_syn_hat, p_var_hat = _apply_noise(p_syn, p_var, batch_stub)
        phi_wm_hat = _executed_features(
            model, entries, p_syn_hat.data, p_var_hat.data
        )
    return _Batch(entries, msgs.astype(np.float32), phi_wm, m_hard,
                  syn_noise, var_noise, phi_wm_hat)


def _losses(model: ModelBundle, batch: _Batch, sigma_p: float,
            dropout_seed: int, update_stats: bool) -> Dict[str, Tensor]:
    """Differentiable losses with the non-differentiable path frozen.

    Deterministic given (parameters, batch, dropout_seed): dropout masks
    are re-derived from the seed, so re-evaluation (finite differences)
    sees the same stochastic choices.
    """
    drop_rng = np.random.default_rng(dropout_seed)
    phi = Tensor(np.stack([e.phi for e in batch.entries]))
    masks = np.stack([e.mask for e in batch.entries])
    msg_t = Tensor(batch.msgs)
    f_code, p_syn, p_var = distributions_batch(phi, msg_t, masks, model)

    approx = approximate_batch(f_code, p_syn, p_var, model)
    soft_approx = model.extractor.forward(
        approx, mode="train", rng=drop_rng, update_stats=update_stats
    ).sigmoid()

    # detectability reads both routes: the executed watermarked code's
    # feature (trains the decoder on what it will see at extraction time)
    # and the approximated feature (the only differentiable route into
    # the insertion heads)
    f_wm = encode_batch(Tensor(batch.phi_wm), model)
    soft_real = model.extractor.forward(
        f_wm, mode="train", rng=drop_rng, update_stats=update_stats
    ).sigmoid()
    l_d = (bce(soft_approx, batch.msgs) + bce(soft_real, batch.msgs)) * 0.5
    l_f = mse(approx, f_wm) + bce(soft_approx, batch.m_hard)

    if sigma_p > 0.0 and batch.syn_noise is not None:
        p_syn_hat, p_var_hat = _apply_noise(p_syn, p_var, batch)
        approx_hat = approximate_batch(f_code, p_syn_hat, p_var_hat, model)
        soft_hat = model.extractor.forward(
            approx_hat, mode="train", rng=drop_rng, update_stats=update_stats
        ).sigmoid()
        f_wm_hat = encode_batch(Tensor(batch.phi_wm_hat), model)
        soft_real_hat = model.extractor.forward(
            f_wm_hat, mode="train", rng=drop_rng, update_stats=update_stats
        ).sigmoid()
        l_r = (bce(soft_hat, batch.msgs) + bce(soft_real_hat, batch.msgs)) * 0.5
    else:
        l_r = l_d
    return {"l_f": l_f, "l_d": l_d, "l_r": l_r}


def _apply_noise(p_syn: Tensor, p_var: Tensor, batch: _Batch):
    syn_hat = (p_syn + Tensor(batch.syn_noise)).maximum(0.0)
    var_hat = (p_var + Tensor(batch.var_noise)).maximum(0.0)
    syn_denom = syn_hat.sum(axis=-1, keepdims=True).maximum(1e-8)
    var_denom = var_hat.sum(axis=-1, keepdims=True).maximum(1e-8)
    return syn_hat / syn_denom, var_hat / var_denom


@dataclass
class TrainResult:
    model: ModelBundle
    log: List[LossBreakdown] = field(default_factory=list)


def _as_tree(program):
    if hasattr(program, "canonical_solution"):
        return parse(program.canonical_solution)
    if isinstance(program, str):
        return parse(program)
    return program


def prepare_corpus(corpus, model: ModelBundle) -> List[_ProgramEntry]:
    entries = []
    for program in corpus:
        tree = _as_tree(program)
        entry = _ProgramEntry.build(tree, model)
        try:
            check_capacity(entry.index, model.config.n_bits)
        except Exception:
            continue  # below-capacity programs cannot carry this message length
        entries.append(entry)
    return entries


def train(corpus, cfg: TrainConfig = TrainConfig(),
          model_config: Optional[ModelConfig] = None,
          log_path=None, checkpoint_dir=None) -> TrainResult:
    """Train a fresh bundle; bit-identical across runs for a fixed seed."""
    vocab = default_vocab()
    mcfg = model_config or ModelConfig(n_bits=cfg.n_bits)
    if mcfg.n_bits != cfg.n_bits:
        mcfg = ModelConfig(**{**mcfg.__dict__, "n_bits": cfg.n_bits})
    model = ModelBundle(mcfg, vocab, seed=cfg.seed)
    entries = prepare_corpus(corpus, model)
    if not entries:
        raise EmptyCorpusError("no trainable programs in the corpus")

    rng = np.random.default_rng(cfg.seed)
    optimizer = AdamW(model.params(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    log: List[LossBreakdown] = []
    log_fh = open(log_path, "w") if log_path else None
    step = 0
    try:
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(entries))
            for start in range(0, len(entries), cfg.batch_size):
                chosen = [entries[i] for i in order[start : start + cfg.batch_size]]
                msgs = rng.integers(0, 2, size=(len(chosen), cfg.n_bits)).astype(
                    np.float32
                )
                batch = _prepare(model, chosen, msgs, cfg.sigma_p, rng)
                dropout_seed = int(rng.integers(0, 2**31 - 1))
                parts = _losses(model, batch, cfg.sigma_p, dropout_seed,
                                update_stats=True)
                total = (
                    cfg.w_f * parts["l_f"]
                    + cfg.w_d * parts["l_d"]
                    + cfg.w_r * parts["l_r"]
                )
                optimizer.zero_grad()
                total.backward()
                optimizer.step()
                entry = LossBreakdown(
                    step=step,
                    l_f=parts["l_f"].item(),
                    l_d=parts["l_d"].item(),
                    l_r=parts["l_r"].item(),
                    total=total.item(),
                )
                log.append(entry)
                if log_fh:
                    log_fh.write(entry.to_json() + "\n")
                step += 1
            if checkpoint_dir is not None:
                model.save(f"{checkpoint_dir}/checkpoint_{epoch:03d}.bin")
    finally:
        if log_fh:
            log_fh.close()
    return TrainResult(model=model, log=log)


def decoder_ablation(corpus, cfg: TrainConfig,
                     mode: str, eval_corpus=None, seed: int = 0):
    """Train with one channel disabled and report detection metrics.

    mode: "syn_only" (no renames), "var_only" (no syntactic rewrites),
    or "both".
    """
    if mode not in ("syn_only", "var_only", "both"):
        raise ValueError(f"unknown ablation mode {mode!r}")
    mcfg = ModelConfig(
        n_bits=cfg.n_bits,
        use_style_channel=mode != "var_only",
        use_rename_channel=mode != "syn_only",
    )
    result = train(corpus, cfg, model_config=mcfg)
    trees = [_as_tree(p) for p in (eval_corpus if eval_corpus is not None else corpus)]
    outcome = evaluate_detection(result.model, trees, seed=seed)
    return outcome["report"]
