"""Proof generation and verification.

The reference backend is a satisfaction transcript: it generates the
full witness, checks every constraint, and emits a binding digest over
the circuit hash, the public inputs, and a commitment to the private
inputs. It is zero-knowledge in interface shape (the verifier sees no
private data), not in cryptographic strength; a production proof system
plugs in behind the same two-method seam.

File formats (little-endian):

    proof artifact  magic b"RSZK", version u16, circuit hash 32B,
                    n_bits u16, theta fixed-point u64,
                    public-input count u32,
                    entries of [name-len u16, name utf-8, value 16B],
                    proof length u32, proof bytes
    verifier key    magic b"RSVK", version u16, circuit hash 32B,
                    n_bits u16, theta fixed-point u64
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Dict, Optional

from ..errors import UnsatisfiableWitnessError
from .circuit import ArithmeticCircuit

PROOF_MAGIC = b"RSZK"
VK_MAGIC = b"RSVK"
VERSION = 1
_WITNESS_DOMAIN = b"rosemark.witness.v1"
_TRANSCRIPT_DOMAIN = b"rosemark.transcript.v1"


def _pack_public(public: Dict[str, int]) -> bytes:
    out = [struct.pack("<I", len(public))]
    for name in sorted(public):
        encoded = name.encode("utf-8")
        out.append(struct.pack("<H", len(encoded)))
        out.append(encoded)
        out.append(int(public[name]).to_bytes(16, "little"))
    return b"".join(out)


def _unpack_public(buf: bytes, offset: int):
    (count,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    public = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", buf, offset)
        offset += 2
        name = buf[offset : offset + name_len].decode("utf-8")
        offset += name_len
        public[name] = int.from_bytes(buf[offset : offset + 16], "little")
        offset += 16
    return public, offset


@dataclass
class ProofArtifact:
    proof: bytes
    vk: bytes
    public: Dict[str, int]
    circuit_hash: bytes
    n_bits: int
    theta_fp: int

    def to_bytes(self) -> bytes:
        head = PROOF_MAGIC + struct.pack("<H", VERSION) + self.circuit_hash
        head += struct.pack("<HQ", self.n_bits, self.theta_fp)
        body = _pack_public(self.public)
        body += struct.pack("<I", len(self.proof)) + self.proof
        return head + body

    @staticmethod
    def from_bytes(buf: bytes) -> "ProofArtifact":
        if buf[:4] != PROOF_MAGIC:
            raise ValueError("not a proof artifact")
        (version,) = struct.unpack_from("<H", buf, 4)
        if version != VERSION:
            raise ValueError(f"unsupported artifact version {version}")
        circuit_hash = buf[6:38]
        n_bits, theta_fp = struct.unpack_from("<HQ", buf, 38)
        public, offset = _unpack_public(buf, 48)
        (proof_len,) = struct.unpack_from("<I", buf, offset)
        offset += 4
        proof = buf[offset : offset + proof_len]
        vk = make_vk_bytes(circuit_hash, n_bits, theta_fp)
        return ProofArtifact(proof, vk, public, circuit_hash, n_bits, theta_fp)

    def save(self, proof_path, vk_path=None):
        with open(proof_path, "wb") as fh:
            fh.write(self.to_bytes())
        if vk_path is not None:
            with open(vk_path, "wb") as fh:
                fh.write(self.vk)

    @staticmethod
    def load(proof_path, vk_path=None) -> "ProofArtifact":
        with open(proof_path, "rb") as fh:
            artifact = ProofArtifact.from_bytes(fh.read())
        if vk_path is not None:
            with open(vk_path, "rb") as fh:
                artifact.vk = fh.read()
        return artifact


def make_vk_bytes(circuit_hash: bytes, n_bits: int, theta_fp: int) -> bytes:
    return (
        VK_MAGIC + struct.pack("<H", VERSION) + circuit_hash
        + struct.pack("<HQ", n_bits, theta_fp)
    )


class ReferenceBackend:
    """Deterministic constraint-satisfaction checker with binding digests."""

    name = "satisfaction-transcript"

    def prove(self, circuit: ArithmeticCircuit, public: Dict[str, int],
              private: Dict[str, int]) -> ProofArtifact:
        # witness generation; raises UnsatisfiableWitnessError on any
        # violated constraint (e.g. claiming valid_BER=1 when BER > theta)
        circuit.satisfy(public, private)
        circuit_hash = circuit.circuit_hash()
        private_blob = b"".join(
            name.encode() + int(private[name]).to_bytes(16, "little")
            for name in sorted(private)
        )
        commitment = hashlib.sha256(
            _WITNESS_DOMAIN + circuit_hash + private_blob
        ).digest()
        transcript = hashlib.sha256(
            _TRANSCRIPT_DOMAIN + circuit_hash + _pack_public(public) + commitment
        ).digest()
        n_bits = int(circuit.meta.get("n_bits", 0))
        theta_fp = int(public.get("theta_fp", circuit.meta.get("theta_fp", 0)))
        return ProofArtifact(
            proof=commitment + transcript,
            vk=make_vk_bytes(circuit_hash, n_bits, theta_fp),
            public=dict(public),
            circuit_hash=circuit_hash,
            n_bits=n_bits,
            theta_fp=theta_fp,
        )

    def verify(self, artifact: ProofArtifact) -> bool:
        try:
            vk = artifact.vk
            if vk[:4] != VK_MAGIC or len(vk) != 4 + 2 + 32 + 10:
                return False
            (version,) = struct.unpack_from("<H", vk, 4)
            if version != VERSION:
                return False
            circuit_hash = vk[6:38]
            if circuit_hash != artifact.circuit_hash:
                return False
            if len(artifact.proof) != 64:
                return False
            commitment, transcript = artifact.proof[:32], artifact.proof[32:]
            expected = hashlib.sha256(
                _TRANSCRIPT_DOMAIN + circuit_hash
                + _pack_public(artifact.public) + commitment
            ).digest()
            if transcript != expected:
                return False
            return int(artifact.public.get("claimed_valid", 0)) == 1
        except Exception:
            return False


def prove(circuit: ArithmeticCircuit, public: Dict[str, int],
          private: Dict[str, int],
          backend: Optional[ReferenceBackend] = None) -> ProofArtifact:
    backend = backend or ReferenceBackend()
    return backend.prove(circuit, public, private)


def verify(artifact: ProofArtifact,
           backend: Optional[ReferenceBackend] = None) -> bool:
    backend = backend or ReferenceBackend()
    return backend.verify(artifact)
