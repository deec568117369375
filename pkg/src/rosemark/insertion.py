"""Watermark insertion: fuse code and message features, predict per-site
transformation distributions and a replacement-identifier distribution,
and execute the argmax plan.

Insertion over frozen parameters is a pure function of (tree, message);
Gaussian perturbation exists only for training's adversarial path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import CapacityError
from .features import featurize, raw_dim
from .messages import BitMessage
from .nn import BatchNorm, Dropout, Linear, ReLU, Stack, Tensor
from .nn.io import load_arrays, save_arrays
from .syntax import scopes
from .transforms import Family, TransformPlan, apply_plan, site_index

# Reference large-scale configuration (documentation only; desk builds
# derive every shape from ModelConfig instead).
LARGE_SCALE_REFERENCE_DIMS = {
    "feature_approximator": (2304, 768),
    "message_embedder": (4, 768),
    "style_head": (1536, 320),
    "rename_head": (1536, 32100),
    "extractor": (768, 4),
}
LARGE_SCALE_REFERENCE_HYPER = {
    "epochs": 20,
    "batch_size": 16,
    "loss_weights": (1.0, 1.0, 0.05),
    "optimizer": "AdamW",
    "lr": 5e-5,
    "sigma_p": 0.1,
    "max_tokens": 512,
}


@dataclass(frozen=True)
class ModelConfig:
    n_bits: int = 4
    d_enc: int = 64
    n_buckets: int = 4096
    max_sites: int = 16
    max_alts: int = 8
    hidden: int = 64
    dropout_rate: float = 0.1
    rename_top_k: int = 2
    use_style_channel: bool = True  # ablation: argmax transformations applied
    use_rename_channel: bool = True  # ablation: top-k renames applied

    @property
    def syn_dim(self) -> int:
        return self.max_sites * self.max_alts

    def approximator_in(self, vocab_size: int) -> int:
        return self.d_enc + self.syn_dim + vocab_size


@dataclass
class SiteDistributions:
    """Per-site transformation probabilities plus the shared vocabulary
    distribution broadcast over rename sites."""

    p_syn: List[np.ndarray]  # one vector per syntactic site, each sums to 1
    p_var: np.ndarray  # (vocab_size,) shared by every rename site
    syn_site_ids: Tuple[int, ...]
    rename_site_ids: Tuple[int, ...]
    syn_alternatives: Tuple[Tuple[int, ...], ...]

    def syn_grid(self, config: ModelConfig) -> np.ndarray:
        grid = np.zeros((config.max_sites, config.max_alts), dtype=np.float32)
        for row, (alts, probs) in enumerate(zip(self.syn_alternatives, self.p_syn)):
            if row >= config.max_sites:
                break
            grid[row, list(alts)] = probs
        return grid


class ModelBundle:
    """All trainable parameters of the insertion/extraction pipeline."""

    def __init__(self, config: ModelConfig, vocab: Sequence[str], seed: int = 0,
                 dtype=np.float32):
        self.config = config
        self.vocab = tuple(vocab)
        rng = np.random.default_rng(seed)
        d, v = config.d_enc, len(self.vocab)
        self.encoder_proj = Linear(raw_dim(config.n_buckets), d, rng, dtype=dtype)
        # strong message component keeps the predicted plans message-dominant
        self.message_embedder = Linear(config.n_bits, d, rng, scale=2.0, dtype=dtype)
        self.style_head = Linear(2 * d, config.syn_dim, rng, dtype=dtype)
        self.rename_head = Linear(2 * d, v, rng, dtype=dtype)
        self.feature_approximator = Linear(config.approximator_in(v), d, rng, dtype=dtype)
        self.extractor = Stack([
            Linear(d, config.hidden, rng, dtype=dtype),
            BatchNorm(config.hidden, dtype=dtype),
            ReLU(),
            Dropout(config.dropout_rate),
            Linear(config.hidden, config.n_bits, rng, dtype=dtype),
        ])

    # -- parameters -----------------------------------------------------------

    def named_modules(self):
        return {
            "encoder_proj": self.encoder_proj,
            "message_embedder": self.message_embedder,
            "style_head": self.style_head,
            "rename_head": self.rename_head,
            "feature_approximator": self.feature_approximator,
            "extractor.0": self.extractor.layers[0],
            "extractor.1": self.extractor.layers[1],
            "extractor.4": self.extractor.layers[4],
        }

    def params(self):
        out = []
        for module in self.named_modules().values():
            out.extend(module.params())
        return out

    def named_params(self):
        out = {}
        for mod_name, module in self.named_modules().items():
            for arr_name, value in module.arrays().items():
                if hasattr(value, "requires_grad"):
                    out[f"{mod_name}.{arr_name}"] = value
        return out

    # -- persistence ------------------------------------------------------------

    def save(self, path):
        arrays = {}
        for mod_name, module in self.named_modules().items():
            for arr_name, value in module.arrays().items():
                data = value.data if hasattr(value, "data") else value
                arrays[f"{mod_name}.{arr_name}"] = data
        from dataclasses import asdict

        config = {"model": asdict(self.config), "vocab": list(self.vocab)}
        save_arrays(path, config, arrays)

    @staticmethod
    def load(path) -> "ModelBundle":
        config, arrays = load_arrays(path)
        bundle = ModelBundle(ModelConfig(**config["model"]), config["vocab"], seed=0)
        for mod_name, module in bundle.named_modules().items():
            for arr_name, value in module.arrays().items():
                stored = arrays[f"{mod_name}.{arr_name}"]
                if hasattr(value, "data"):
                    value.data = stored.astype(value.data.dtype)
                else:  # running statistics
                    setattr(module, arr_name, stored)
        return bundle


# --- feature paths -------------------------------------------------------------


def raw_features(tree, model: ModelBundle, index=None) -> np.ndarray:
    if index is None:
        index = site_index(tree, model.vocab)
    return featurize(tree, index.sites, model.config.n_buckets)


def encode_batch(phi: Tensor, model: ModelBundle) -> Tensor:
    return model.encoder_proj.forward(phi).relu()


def encode_code(tree, model: ModelBundle) -> np.ndarray:
    """Deterministic code feature shared by insertion and extraction."""
    phi = Tensor(raw_features(tree, model)[None, :])
    return encode_batch(phi, model).data[0].copy()


def embed_message(message: BitMessage, model: ModelBundle) -> np.ndarray:
    if len(message) != model.config.n_bits:
        raise ValueError(
            f"message length {len(message)} != configured {model.config.n_bits}"
        )
    m = Tensor(message.to_array()[None, :])
    return model.message_embedder.forward(m).data[0].copy()


def site_masks(index, config: ModelConfig) -> Tuple[np.ndarray, list, list]:
    """Mask grid for the style head plus the syntactic/rename site split."""
    syn_sites = [s for s in index.sites if s.family != Family.VARIABLE_RENAME]
    rename_sites = [s for s in index.sites if s.family == Family.VARIABLE_RENAME]
    mask = np.zeros((config.max_sites, config.max_alts), dtype=np.float32)
    for row, site in enumerate(syn_sites[: config.max_sites]):
        mask[row, list(site.alternatives)] = 1.0
    return mask, syn_sites, rename_sites


def distributions_batch(phi: Tensor, msgs: Tensor, masks: np.ndarray,
                        model: ModelBundle) -> Tuple[Tensor, Tensor, Tensor]:
    """Batched forward: code feature, per-site style probs, vocab probs."""
    cfg = model.config
    f_code = encode_batch(phi, model)
    f_msg = model.message_embedder.forward(msgs)
    fused = Tensor.concat([f_code, f_msg], axis=1)
    syn_logits = model.style_head.forward(fused)
    batch = phi.data.shape[0]
    p_syn = syn_logits.reshape(batch, cfg.max_sites, cfg.max_alts).masked_softmax(masks)
    p_var = model.rename_head.forward(fused).softmax()
    return f_code, p_syn, p_var


def approximate_batch(f_code: Tensor, p_syn: Tensor, p_var: Tensor,
                      model: ModelBundle) -> Tensor:
    cfg = model.config
    batch = f_code.data.shape[0]
    flat = p_syn.reshape(batch, cfg.syn_dim)
    return model.feature_approximator.forward(
        Tensor.concat([f_code, flat, p_var], axis=1)
    )


def perturb_batch(p_syn: Tensor, p_var: Tensor, masks: np.ndarray,
                  sigma_p: float, rng) -> Tuple[Tensor, Tensor]:
    """Zero-mean Gaussian noise on the distributions (adversarial path),
    clamped to >= 0 and renormalized per site."""
    if sigma_p == 0.0:
        return p_syn, p_var
    dtype = p_syn.data.dtype
    syn_noise = (rng.normal(0.0, sigma_p, size=p_syn.data.shape) * masks).astype(dtype)
    var_noise = rng.normal(0.0, sigma_p, size=p_var.data.shape).astype(dtype)
    syn_hat = (p_syn + Tensor(syn_noise)).maximum(0.0)
    var_hat = (p_var + Tensor(var_noise)).maximum(0.0)
    syn_denom = syn_hat.sum(axis=-1, keepdims=True).maximum(1e-8)
    var_denom = var_hat.sum(axis=-1, keepdims=True).maximum(1e-8)
    return syn_hat / syn_denom, var_hat / var_denom


# --- public single-program operations ----------------------------------------------


def mean_bits_per_site(sites) -> float:
    if not sites:
        return 0.0
    logs = [math.log2(len(s.alternatives)) for s in sites]
    return sum(logs) / len(logs)


def required_sites(n_bits: int, sites) -> int:
    per_site = mean_bits_per_site(sites)
    if per_site <= 0.0:
        return 1 if n_bits else 0
    return math.ceil(n_bits / per_site)


def check_capacity(index, n_bits: int) -> None:
    sites = index.sites
    if not sites:
        raise CapacityError("program exposes no transformation sites")
    needed = required_sites(n_bits, sites)
    if len(sites) < needed:
        raise CapacityError(
            f"{len(sites)} sites < {needed} required for {n_bits}-bit messages"
        )


def _dists_for(tree, message: BitMessage, model: ModelBundle, index):
    cfg = model.config
    mask, syn_sites, rename_sites = site_masks(index, cfg)
    phi = Tensor(raw_features(tree, model, index)[None, :])
    msg = Tensor(message.to_array()[None, :])
    _, p_syn, p_var = distributions_batch(phi, msg, mask[None, :, :], model)
    syn_probs = []
    for row, site in enumerate(syn_sites[: cfg.max_sites]):
        probs = p_syn.data[0, row, list(site.alternatives)]
        syn_probs.append(probs.astype(np.float64) / max(probs.sum(), 1e-12))
    return SiteDistributions(
        p_syn=syn_probs,
        p_var=p_var.data[0].copy(),
        syn_site_ids=tuple(s.id for s in syn_sites[: cfg.max_sites]),
        rename_site_ids=tuple(s.id for s in rename_sites),
        syn_alternatives=tuple(tuple(s.alternatives) for s in syn_sites[: cfg.max_sites]),
    )


def predict(tree, message: BitMessage, model: ModelBundle) -> SiteDistributions:
    """Site distributions for (code, message); requires channel capacity."""
    index = site_index(tree, model.vocab)
    check_capacity(index, model.config.n_bits)
    return _dists_for(tree, message, model, index)


def perturb(dists: SiteDistributions, sigma_p: float, rng) -> SiteDistributions:
    """Standalone perturbation of a distribution snapshot."""
    if sigma_p < 0:
        raise ValueError("sigma_p must be >= 0")
    if sigma_p == 0.0:
        return dists
    new_syn = []
    for probs in dists.p_syn:
        noisy = np.maximum(probs + rng.normal(0.0, sigma_p, size=probs.shape), 0.0)
        new_syn.append(noisy / max(noisy.sum(), 1e-8))
    noisy_var = np.maximum(
        dists.p_var + rng.normal(0.0, sigma_p, size=dists.p_var.shape), 0.0
    )
    return dc_replace_dists(
        dists, new_syn, noisy_var / max(noisy_var.sum(), 1e-8)
    )


def dc_replace_dists(dists, p_syn, p_var):
    return SiteDistributions(
        p_syn=p_syn,
        p_var=p_var,
        syn_site_ids=dists.syn_site_ids,
        rename_site_ids=dists.rename_site_ids,
        syn_alternatives=dists.syn_alternatives,
    )


@dataclass
class InsertionResult:
    tree: object
    plan: TransformPlan
    dists: SiteDistributions


def build_plan(tree, dists: SiteDistributions, index, model: ModelBundle) -> TransformPlan:
    """Argmax over every site distribution, plus the top-k rename policy."""
    cfg = model.config
    sites_by_id = {s.id: s for s in index.sites}
    choices: Dict[int, int] = {}
    if cfg.use_style_channel:
        for site_id, alts, probs in zip(
            dists.syn_site_ids, dists.syn_alternatives, dists.p_syn
        ):
            choices[site_id] = int(alts[int(np.argmax(probs))])

    renames: Dict[str, str] = {}
    rename_sites = [sites_by_id[i] for i in dists.rename_site_ids]
    if rename_sites and cfg.rename_top_k > 0 and cfg.use_rename_channel:
        taken = set(scopes.all_identifiers(tree))
        # spellings produced by the chosen naming styles also count as taken
        from .transforms.naming import realize, split_words

        for site_id, choice in choices.items():
            site = sites_by_id[site_id]
            if site.family == Family.NAMING_STYLE and choice != site.current_state:
                taken.add(realize(split_words(site.name), choice))
        order = np.argsort(-dists.p_var, kind="stable")
        assignments = []
        cursor = 0
        for site in rename_sites:
            word = None
            while cursor < len(order):
                candidate = model.vocab[order[cursor]]
                cursor += 1
                if candidate not in taken:
                    word = candidate
                    break
            if word is None:
                break
            taken.add(word)
            assignments.append((float(dists.p_var[order[cursor - 1]]), site, word))
        assignments.sort(key=lambda item: -item[0])
        for _, site, word in assignments[: cfg.rename_top_k]:
            renames[site.name] = word
    return TransformPlan(choices=choices, renames=renames)


def insert(tree, message: BitMessage, model: ModelBundle) -> InsertionResult:
    """Watermark one program: argmax transformations plus top-k renames."""
    index = site_index(tree, model.vocab)
    check_capacity(index, model.config.n_bits)
    dists = _dists_for(tree, message, model, index)
    plan = build_plan(tree, dists, index, model)
    watermarked = apply_plan(tree, plan, model.vocab)
    return InsertionResult(tree=watermarked, plan=plan, dists=dists)


def approximate_feature(code_feat: np.ndarray, dists: SiteDistributions,
                        model: ModelBundle) -> np.ndarray:
    """Differentiable stand-in for the post-watermark code feature."""
    cfg = model.config
    grid = dists.syn_grid(cfg).reshape(1, cfg.syn_dim)
    f = Tensor(np.asarray(code_feat, dtype=np.float32)[None, :])
    out = approximate_batch(
        f, Tensor(grid.reshape(1, cfg.max_sites, cfg.max_alts)),
        Tensor(dists.p_var[None, :].astype(np.float32)), model,
    )
    return out.data[0].copy()
