"""Compile the shallow extraction decoder into a constraint system.

Pipeline: fold inference-mode batch norm into its neighboring affine
layer, quantize all parameters to bfloat16, encode as fixed-point field
elements, then emit the forward circuit (affine / polynomial activation
/ sign threshold) and the bit-error-rate gate.

The plaintext fixed-point path implemented here *is* the reference
semantics: the circuit reproduces it bit-exactly, and completeness and
soundness are argued against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import ArityMismatchError, DegenerateVarianceError, OverflowRiskError
from ..nn.layers import BatchNorm, Linear, Stack
from .bf16 import quantize_bf16
from .circuit import ArithmeticCircuit, CircuitBuilder, FixedPointCodec


def poly_relu(x):
    """Polynomial activation x**2 + x: one multiplication plus one
    addition per unit, expressible with circuit gates. Used identically
    in the plaintext-quantized and in-circuit paths."""
    return x * x + x


def poly_relu_fixed(x: int, frac_bits: int) -> int:
    """Fixed-point poly_relu: square, arithmetic-shift, add."""
    return ((x * x) >> frac_bits) + x


def fold_batchnorm(stack: Stack) -> "QuantizedDecoder":
    """Fold inference-mode batch norm into the preceding linear layer.

    y = gamma (W x + b - mean) / sqrt(var + eps) + beta collapses to
    W' = diag(gamma / sqrt(var + eps)) W and the matching bias. Dropout
    is inference-identity and disappears.
    """
    layers = [l for l in stack.layers]
    linears = [l for l in layers if isinstance(l, Linear)]
    norms = [l for l in layers if isinstance(l, BatchNorm)]
    if len(linears) != 2 or len(norms) != 1:
        raise ValueError("expected Linear-BatchNorm-...-Linear decoder stack")
    first, second = linears
    bn = norms[0]
    if np.any(bn.running_var <= 0):
        raise DegenerateVarianceError("running variance must be positive")
    scale = bn.gamma.data / np.sqrt(bn.running_var + bn.eps)
    w1 = scale[:, None] * first.weight.data
    b1 = scale * (first.bias.data - bn.running_mean) + bn.beta.data
    return QuantizedDecoder(
        w1=quantize_bf16(w1.astype(np.float32)),
        b1=quantize_bf16(b1.astype(np.float32)),
        w2=quantize_bf16(second.weight.data.astype(np.float32)),
        b2=quantize_bf16(second.bias.data.astype(np.float32)),
    )


def fold_batchnorm_unquantized(stack: Stack):
    """Folded float parameters before quantization (for numeric checks)."""
    layers = [l for l in stack.layers]
    first, second = [l for l in layers if isinstance(l, Linear)]
    bn = [l for l in layers if isinstance(l, BatchNorm)][0]
    if np.any(bn.running_var <= 0):
        raise DegenerateVarianceError("running variance must be positive")
    scale = bn.gamma.data / np.sqrt(bn.running_var + bn.eps)
    w1 = scale[:, None] * first.weight.data
    b1 = scale * (first.bias.data - bn.running_mean) + bn.beta.data
    return w1, b1, second.weight.data.copy(), second.bias.data.copy()


@dataclass
class QuantizedDecoder:
    """Inference-only decoder: two affine layers around poly_relu, all
    parameters exactly bfloat16-representable."""

    w1: np.ndarray  # (hidden, d_enc)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_bits, hidden)
    b2: np.ndarray  # (n_bits,)

    @property
    def d_enc(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_bits(self) -> int:
        return self.w2.shape[0]

    def int_params(self, codec: FixedPointCodec):
        s = codec.scale
        w1 = np.round(self.w1.astype(np.float64) * s).astype(object)
        b1 = np.round(self.b1.astype(np.float64) * s).astype(object)
        w2 = np.round(self.w2.astype(np.float64) * s).astype(object)
        b2 = np.round(self.b2.astype(np.float64) * s).astype(object)
        return w1, b1, w2, b2

    def plaintext_logits_fixed(self, embedding: Sequence[float],
                               codec: FixedPointCodec) -> List[int]:
        """Fixed-point integer inference; the circuit mirrors this
        operation-for-operation."""
        f = codec.frac_bits
        x = [codec.to_signed(v) for v in codec.encode_vector(embedding)]
        w1, b1, w2, b2 = self.int_params(codec)
        hidden = []
        for j in range(self.hidden):
            acc = sum(int(w1[j, i]) * x[i] for i in range(self.d_enc))
            acc += int(b1[j]) << f
            hidden.append(acc >> f)
        activated = [poly_relu_fixed(h, f) for h in hidden]
        logits = []
        for k in range(self.n_bits):
            acc = sum(int(w2[k, j]) * activated[j] for j in range(self.hidden))
            acc += int(b2[k]) << f
            logits.append(acc >> f)
        return logits

    def plaintext_bits(self, embedding: Sequence[float],
                       codec: FixedPointCodec) -> List[int]:
        """Reference extraction bits: logit >= 0, i.e. sigmoid >= 0.5."""
        return [1 if v >= 0 else 0 for v in self.plaintext_logits_fixed(embedding, codec)]

    def static_bounds(self, codec: FixedPointCodec):
        """Worst-case magnitudes per stage, scaled; used for overflow
        checks and gadget bounds."""
        s = codec.scale
        x_bound = codec.input_bound * s
        acc1 = (np.abs(self.w1).astype(np.float64) * s).sum(axis=1).max() * x_bound
        acc1 += np.abs(self.b1).max() * s * s if self.b1.size else 0
        h_bound = acc1 / s + 1
        act_bound = (h_bound * h_bound) / s + h_bound + 1
        acc2 = (np.abs(self.w2).astype(np.float64) * s).sum(axis=1).max() * act_bound
        acc2 += np.abs(self.b2).max() * s * s if self.b2.size else 0
        logit_bound = acc2 / s + 1
        return {
            "acc1": acc1, "h": h_bound, "act": act_bound,
            "acc2": acc2, "logit": logit_bound,
        }


def _bits_for(bound: float) -> int:
    return max(1, math.ceil(math.log2(bound + 1))) + 1


def compile_forward(decoder: QuantizedDecoder,
                    codec: FixedPointCodec) -> ArithmeticCircuit:
    """Arithmetize quantized inference. Public inputs: the embedding.
    Private inputs: the decoder parameters. Outputs: n_bits boolean
    wires thresholded at sigmoid 0.5 (logit sign)."""
    bounds = decoder.static_bounds(codec)
    worst = max(bounds["acc1"], bounds["acc2"], bounds["act"] * codec.scale)
    if worst * 4 >= codec.modulus / 2:
        raise OverflowRiskError(
            f"bound {worst:.3g} too close to field size {codec.modulus:.3g}"
        )
    f = codec.frac_bits
    b = CircuitBuilder(codec.modulus)
    b.meta.update({
        "kind": "decoder_forward",
        "d_enc": decoder.d_enc,
        "hidden": decoder.hidden,
        "n_bits": decoder.n_bits,
        "frac_bits": f,
    })
    x = [b.public(f"embedding_{i}") for i in range(decoder.d_enc)]
    w1, b1, w2, b2 = decoder.int_params(codec)
    w1_w = [[b.private(f"w1_{j}_{i}") for i in range(decoder.d_enc)]
            for j in range(decoder.hidden)]
    b1_w = [b.private(f"b1_{j}") for j in range(decoder.hidden)]
    w2_w = [[b.private(f"w2_{k}_{j}") for j in range(decoder.hidden)]
            for k in range(decoder.n_bits)]
    b2_w = [b.private(f"b2_{k}") for k in range(decoder.n_bits)]

    shift = b.const(codec.scale)
    acc1_bits = _bits_for(bounds["acc1"] / codec.scale)
    activated = []
    for j in range(decoder.hidden):
        terms = [b.mul(w1_w[j][i], x[i]) for i in range(decoder.d_enc)]
        terms.append(b.mul(b1_w[j], shift))
        acc = b.sum_wires(terms)
        h = b.trunc(acc, f, acc1_bits)
        squared = b.trunc(b.mul(h, h), f, _bits_for(bounds["act"]))
        activated.append(b.add(squared, h))
    logit_bits = _bits_for(bounds["acc2"] / codec.scale)
    out_bits = []
    for k in range(decoder.n_bits):
        terms = [b.mul(w2_w[k][j], activated[j]) for j in range(decoder.hidden)]
        terms.append(b.mul(b2_w[k], shift))
        logit = b.trunc(b.sum_wires(terms), f, logit_bits)
        bit = b.sign_bit(logit, logit_bits)
        b.outputs[f"bit_{k}"] = bit
        out_bits.append(bit)
    circuit = b.build()
    circuit.validate()
    return circuit


def forward_private_inputs(decoder: QuantizedDecoder,
                           codec: FixedPointCodec) -> dict:
    w1, b1, w2, b2 = decoder.int_params(codec)
    q = codec.modulus
    values = {}
    for j in range(decoder.hidden):
        for i in range(decoder.d_enc):
            values[f"w1_{j}_{i}"] = int(w1[j, i]) % q
        values[f"b1_{j}"] = int(b1[j]) % q
    for k in range(decoder.n_bits):
        for j in range(decoder.hidden):
            values[f"w2_{k}_{j}"] = int(w2[k, j]) % q
        values[f"b2_{k}"] = int(b2[k]) % q
    return values


def compile_ber(n_bits: int, theta: float,
                codec: FixedPointCodec) -> ArithmeticCircuit:
    """Bit-error gate: valid iff the number of differing bits between
    the private signature and the recovered bits is at most
    floor(theta * n_bits). Differences use the arithmetic XOR form
    m + m' - 2 m m'."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    b = CircuitBuilder(codec.modulus)
    b.meta.update({
        "kind": "ber_gate", "n_bits": n_bits,
        "theta_fp": int(round(theta * codec.scale)),
        "frac_bits": codec.frac_bits,
    })
    theta_wire = b.public("theta_fp")
    claimed = b.public("claimed_valid")
    m_wires = [b.private(f"m_{i}") for i in range(n_bits)]
    mp_wires = [b.private(f"m_prime_{i}") for i in range(n_bits)]
    for w in m_wires + mp_wires:
        b.assert_bool(w)
    diffs = []
    minus_two = b.const(codec.modulus - 2)
    for m, mp in zip(m_wires, mp_wires):
        prod = b.mul(m, mp)
        diffs.append(b.add(b.add(m, mp), b.mul(prod, minus_two)))
    total = b.sum_wires(diffs) if diffs else b.const(0)
    allowed = b.trunc(
        b.mul(theta_wire, b.const(n_bits)), codec.frac_bits,
        _bits_for(n_bits),
    )
    slack = b.sub(allowed, total)
    valid = b.sign_bit(slack, _bits_for(n_bits) + 1)
    b.assert_eq(valid, claimed)
    b.outputs["valid_ber"] = valid
    circuit = b.build()
    circuit.validate()
    return circuit


def compose(forward: ArithmeticCircuit, ber: ArithmeticCircuit) -> ArithmeticCircuit:
    """Pipe the forward circuit's output bits into the BER gate's
    recovered-bit inputs; the only public output is valid_ber. Wires are
    renumbered compactly so the composed system still drives every wire
    exactly once."""
    if not ber.ops:  # composing with an empty circuit is the identity
        return forward
    if not forward.ops:
        return ber
    bit_wires = [forward.outputs[k] for k in sorted(forward.outputs)
                 if k.startswith("bit_")]
    mp_names = [name for name, _ in ber.private_inputs if name.startswith("m_prime_")]
    if len(bit_wires) != len(mp_names):
        raise ArityMismatchError(
            f"forward emits {len(bit_wires)} bits, gate expects {len(mp_names)}"
        )
    wire_map = {}
    next_wire = forward.n_wires

    def fresh(old: int) -> int:
        nonlocal next_wire
        wire_map[old] = next_wire
        next_wire += 1
        return wire_map[old]

    ops = list(forward.ops)
    for op in ber.ops:
        kind = op[0]
        if kind in ("public", "private", "const"):
            _, w, payload = op
            if kind == "private" and str(payload).startswith("m_prime_"):
                wire_map[w] = bit_wires[int(str(payload).rsplit("_", 1)[1])]
                continue
            ops.append((kind, fresh(w), payload))
        elif kind in ("add", "mul"):
            a, c = wire_map[op[2]], wire_map[op[3]]
            ops.append((kind, fresh(op[1]), a, c))
        elif kind == "hint_trunc":
            v = wire_map[op[3]]
            ops.append((kind, fresh(op[1]), fresh(op[2]), v, op[4]))
        elif kind == "hint_sign":
            v = wire_map[op[2]]
            ops.append((kind, fresh(op[1]), v))
        else:
            raise ValueError(f"unknown op {kind}")
    constraints = list(forward.constraints)
    for c in ber.constraints:
        if c[0] == "range":
            constraints.append((c[0], wire_map[c[1]], c[2]))
        else:
            constraints.append((c[0],) + tuple(wire_map[w] for w in c[1:]))
    combined = ArithmeticCircuit(
        modulus=forward.modulus,
        n_wires=next_wire,
        ops=tuple(ops),
        constraints=tuple(constraints),
        public_inputs=forward.public_inputs
        + tuple((n, wire_map[w]) for n, w in ber.public_inputs),
        private_inputs=forward.private_inputs
        + tuple(
            (n, wire_map[w])
            for n, w in ber.private_inputs
            if not n.startswith("m_prime_")
        ),
        outputs={"valid_ber": wire_map[ber.outputs["valid_ber"]]},
        meta={**forward.meta, **ber.meta, "kind": "composed_verification"},
    )
    combined.validate()
    return combined
