"""Arithmetic constraint systems over a prime field.

A circuit is a witness-generation program (constant/add/mul ops plus
prover hints for truncation and sign bits) together with a constraint
list (equality, booleanness, range membership). The reference evaluator
computes every wire exactly once, in order; constraints are checked
against the finished assignment, so forced (malicious) witness values
can be probed independently of honest evaluation.

Signed values use centered encoding: w represents w if w < q/2, else
w - q.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import OverflowRiskError, UnsatisfiableWitnessError

# M127, a Mersenne prime: comfortably larger than any intermediate value
# the compiled decoders produce (bounds are checked at compile time).
DEFAULT_MODULUS = (1 << 127) - 1


@dataclass(frozen=True)
class FixedPointCodec:
    frac_bits: int = 16
    modulus: int = DEFAULT_MODULUS
    input_bound: float = 4096.0  # |encoded input| must stay below this

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    def encode(self, value: float) -> int:
        if abs(value) > self.input_bound:
            raise OverflowRiskError(
                f"input {value!r} exceeds codec bound {self.input_bound}"
            )
        return int(round(float(value) * self.scale)) % self.modulus

    def encode_vector(self, values) -> List[int]:
        return [self.encode(v) for v in values]

    def decode(self, element: int) -> float:
        return self.to_signed(element) / self.scale

    def to_signed(self, element: int) -> int:
        element %= self.modulus
        return element if element < self.modulus // 2 else element - self.modulus


class CircuitBuilder:
    def __init__(self, modulus: int = DEFAULT_MODULUS):
        self.modulus = modulus
        self.ops: List[tuple] = []
        self.constraints: List[tuple] = []
        self.public_inputs: List[Tuple[str, int]] = []
        self.private_inputs: List[Tuple[str, int]] = []
        self.outputs: Dict[str, int] = {}
        self.meta: Dict[str, object] = {}
        self._n_wires = 0
        self._consts: Dict[int, int] = {}

    def _wire(self) -> int:
        w = self._n_wires
        self._n_wires += 1
        return w

    def public(self, name: str) -> int:
        w = self._wire()
        self.ops.append(("public", w, name))
        self.public_inputs.append((name, w))
        return w

    def private(self, name: str) -> int:
        w = self._wire()
        self.ops.append(("private", w, name))
        self.private_inputs.append((name, w))
        return w

    def const(self, value: int) -> int:
        value %= self.modulus
        if value in self._consts:
            return self._consts[value]
        w = self._wire()
        self.ops.append(("const", w, value))
        self._consts[value] = w
        return w

    def add(self, a: int, b: int) -> int:
        w = self._wire()
        self.ops.append(("add", w, a, b))
        return w

    def mul(self, a: int, b: int) -> int:
        w = self._wire()
        self.ops.append(("mul", w, a, b))
        return w

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.mul(b, self.const(self.modulus - 1)))

    def sum_wires(self, wires: Sequence[int]) -> int:
        acc = wires[0]
        for w in wires[1:]:
            acc = self.add(acc, w)
        return acc

    def assert_eq(self, a: int, b: int):
        self.constraints.append(("eq", a, b))

    def assert_bool(self, w: int):
        self.constraints.append(("bool", w))

    def assert_range(self, w: int, bits: int):
        self.constraints.append(("range", w, bits))

    def trunc(self, v: int, shift: int, bound_bits: int) -> int:
        """Floor-divide a signed wire by 2^shift (arithmetic shift).

        Prover supplies quotient and remainder; the decomposition
        v == t * 2^shift + r with 0 <= r < 2^shift pins them uniquely.
        |t| must fit below 2^bound_bits.
        """
        t = self._wire()
        r = self._wire()
        self.ops.append(("hint_trunc", t, r, v, shift))
        recomposed = self.add(self.mul(t, self.const(1 << shift)), r)
        self.assert_eq(v, recomposed)
        self.assert_range(r, shift)
        # shifted quotient is non-negative iff t >= -2^bound_bits
        t_shifted = self.add(t, self.const(1 << bound_bits))
        self.assert_range(t_shifted, bound_bits + 1)
        return t

    def sign_bit(self, v: int, bound_bits: int) -> int:
        """1 iff the signed value on wire v is >= 0; |v| < 2^bound_bits."""
        b = self._wire()
        self.ops.append(("hint_sign", b, v))
        self.assert_bool(b)
        big = 1 << bound_bits
        shifted = self.add(v, self.const(big))  # in [0, 2*big)
        residual = self.sub(shifted, self.mul(b, self.const(big)))
        self.assert_range(residual, bound_bits)
        return b

    def build(self) -> "ArithmeticCircuit":
        return ArithmeticCircuit(
            modulus=self.modulus,
            n_wires=self._n_wires,
            ops=tuple(self.ops),
            constraints=tuple(self.constraints),
            public_inputs=tuple(self.public_inputs),
            private_inputs=tuple(self.private_inputs),
            outputs=dict(self.outputs),
            meta=dict(self.meta),
        )


@dataclass(frozen=True)
class ArithmeticCircuit:
    modulus: int
    n_wires: int
    ops: Tuple[tuple, ...]
    constraints: Tuple[tuple, ...]
    public_inputs: Tuple[Tuple[str, int], ...]
    private_inputs: Tuple[Tuple[str, int], ...]
    outputs: Dict[str, int]
    meta: Dict[str, object] = field(default_factory=dict)

    # -- structure -------------------------------------------------------------

    def validate(self):
        driven = set()
        for op in self.ops:
            kind = op[0]
            targets = op[1:3] if kind == "hint_trunc" else (op[1],)
            for w in targets:
                if w in driven:
                    raise ValueError(f"wire {w} driven twice")
                driven.add(w)
            sources = {
                "add": op[2:4], "mul": op[2:4],
                "hint_trunc": (op[3],), "hint_sign": (op[2],),
            }.get(kind, ())
            for src in sources:
                if src not in driven:
                    raise ValueError(f"wire {src} read before driven (acyclicity)")
        if len(driven) != self.n_wires:
            raise ValueError("undriven wires present")

    def canonical_bytes(self) -> bytes:
        doc = {
            "modulus": self.modulus,
            "n_wires": self.n_wires,
            "ops": [list(op) for op in self.ops],
            "constraints": [list(c) for c in self.constraints],
            "public": [list(p) for p in self.public_inputs],
            "private": [list(p) for p in self.private_inputs],
            "outputs": self.outputs,
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
        }
        return json.dumps(doc, sort_keys=True).encode("utf-8")

    def circuit_hash(self) -> bytes:
        return hashlib.sha256(self.canonical_bytes()).digest()

    # -- evaluation ---------------------------------------------------------------

    def _signed(self, value: int) -> int:
        return value if value < self.modulus // 2 else value - self.modulus

    def evaluate(self, public: Dict[str, int], private: Dict[str, int],
                 force: Optional[Dict[int, int]] = None) -> List[int]:
        """Generate the full witness. `force` overrides chosen wires
        (used to probe soundness); forced wires skip their own op but
        everything downstream recomputes."""
        q = self.modulus
        force = force or {}
        wires = [0] * self.n_wires

        def put(w, value):
            wires[w] = force[w] % q if w in force else value % q

        for op in self.ops:
            kind = op[0]
            if kind == "public":
                _, w, name = op
                if name not in public:
                    raise KeyError(f"missing public input {name!r}")
                put(w, int(public[name]))
            elif kind == "private":
                _, w, name = op
                if name not in private:
                    raise KeyError(f"missing private input {name!r}")
                put(w, int(private[name]))
            elif kind == "const":
                put(op[1], op[2])
            elif kind == "add":
                put(op[1], wires[op[2]] + wires[op[3]])
            elif kind == "mul":
                put(op[1], wires[op[2]] * wires[op[3]])
            elif kind == "hint_trunc":
                _, t, r, v, shift = op
                signed = self._signed(wires[v])
                quotient = signed >> shift
                put(t, quotient)
                put(r, signed - (quotient << shift))
            elif kind == "hint_sign":
                _, b, v = op
                put(b, 1 if self._signed(wires[v]) >= 0 else 0)
            else:
                raise ValueError(f"unknown op {kind}")
        return wires

    def check(self, wires: List[int]) -> Optional[Tuple[int, tuple]]:
        """First violated constraint as (index, constraint), or None."""
        q = self.modulus
        for idx, constraint in enumerate(self.constraints):
            kind = constraint[0]
            if kind == "eq":
                if (wires[constraint[1]] - wires[constraint[2]]) % q != 0:
                    return idx, constraint
            elif kind == "bool":
                w = wires[constraint[1]]
                if (w * (w - 1)) % q != 0:
                    return idx, constraint
            elif kind == "range":
                value = wires[constraint[1]]
                if not 0 <= value < (1 << constraint[2]):
                    return idx, constraint
        return None

    def satisfy(self, public: Dict[str, int], private: Dict[str, int],
                force: Optional[Dict[int, int]] = None) -> List[int]:
        """Witness generation + constraint check; raises on violation."""
        wires = self.evaluate(public, private, force=force)
        violation = self.check(wires)
        if violation is not None:
            idx, constraint = violation
            raise UnsatisfiableWitnessError(idx, f"constraint {constraint}")
        return wires

    def output_values(self, wires: List[int]) -> Dict[str, int]:
        return {name: wires[w] for name, w in self.outputs.items()}
