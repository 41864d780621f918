"""Scheme library: builders, executor, decoders and accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from ..errors import BadParams, UnknownScheme
from ..model import EVE, RX1, RX2
from ..precoding import assemble_effective_system, identifiable_symbols
from . import composite, library
from .accounting import AccountingReport, accounting, composite_accounting, make_report
from .program import (
    Axis,
    Comb,
    NullOf,
    ObsPart,
    SchemeSpec,
    SlotPlan,
    StreamRecipe,
    Sym,
    TransmissionTrace,
    run_scheme,
)

DECODE_RESIDUAL_TOL = 1e-8

_BUILDERS: dict[str, Callable[..., SchemeSpec]] = {
    "WT_PP": lambda: library.build_wt_zf("WT_PP", "PP"),
    "WT_DP": lambda: library.build_wt_zf("WT_DP", "DP"),
    "WT_PD": library.build_wt_pd,
    "WT_DD_23": library.build_wt_dd_23,
    "MR_PPD": library.build_mr_ppd,
    "MR_PDP": library.build_mr_pdp,
    "MR_DDP": library.build_mr_ddp,
    "MR_PDD": library.build_mr_pdd,
    "MR_S30_29_A": lambda **kw: composite.build_mr_s30_29("MR_S30_29_A", RX1, **kw),
    "MR_S30_29_B": lambda **kw: composite.build_mr_s30_29("MR_S30_29_B", RX2, **kw),
    "SUB_PD_DP_UNICAST": composite.build_sub_pd_dp_unicast,
    "SUB_SECURE_MULTICAST": composite.build_sub_secure_multicast,
    "BC_PP_S2": library.build_bc_pp_s2,
    "BC_DD_S1": library.build_bc_dd_s1,
    "BC_S1_43": library.build_bc_s1_43,
    "BC_S2_43": library.build_bc_s2_43,
}

_DECODERS: dict[str, Callable] = {
    "WT_PP": library.decode_wt_zf,
    "WT_DP": library.decode_wt_zf,
    "WT_PD": library.decode_wt_pd,
    "WT_DD_23": library.decode_wt_dd_23,
    "MR_PPD": library.decode_mr_ppd,
    "MR_PDP": library.decode_mr_pdp,
    "MR_DDP": library.decode_mr_ddp,
    "MR_PDD": library.decode_mr_pdd,
    "MR_S30_29_A": composite.decode_mr_s30_29,
    "MR_S30_29_B": composite.decode_mr_s30_29,
    "SUB_PD_DP_UNICAST": composite.decode_sub_pd_dp_unicast,
    "SUB_SECURE_MULTICAST": composite.decode_sub_secure_multicast,
    "BC_PP_S2": library.decode_bc_pp_s2,
    "BC_DD_S1": library.decode_bc_dd_s1,
    "BC_S1_43": library.decode_bc_43,
    "BC_S2_43": library.decode_bc_43,
}

SCHEME_IDS: tuple[str, ...] = tuple(_BUILDERS)

# Sub-protocol switch values accepted by the composite schemes.
SUB_PROTOCOLS = ("tjsp53", "fallback32")


def cli_name(scheme_id: str) -> str:
    return scheme_id.lower()


def from_cli_name(name: str) -> str:
    scheme_id = name.upper()
    if scheme_id not in _BUILDERS:
        raise UnknownScheme(f"unknown scheme {name!r}")
    return scheme_id


def build_scheme(scheme_id: str, **params) -> SchemeSpec:
    """Instantiate a scheme from the closed id enumeration.

    Composite schemes accept `sub` (sub-protocol switch) and `blocks`
    (dissemination-phase length); everything else takes no parameters.
    """
    if scheme_id not in _BUILDERS:
        raise UnknownScheme(f"unknown scheme {scheme_id!r}")
    if params and not scheme_id.startswith("MR_S30_29"):
        raise BadParams(f"{scheme_id} takes no parameters, got {sorted(params)}")
    if params and not set(params) <= {"sub", "blocks"}:
        raise BadParams(f"unknown parameters {sorted(set(params) - {'sub', 'blocks'})}")
    return _BUILDERS[scheme_id](**params)


@dataclass(frozen=True)
class NodeDecode:
    recovered: Mapping[str, complex]
    max_residual: float
    success: bool


@dataclass(frozen=True)
class DecodeReport:
    nodes: Mapping[str, NodeDecode]
    adversary: Mapping[str, Mapping[str, bool]]

    @property
    def all_success(self) -> bool:
        return all(n.success for n in self.nodes.values())

    @property
    def max_residual(self) -> float:
        return max((n.max_residual for n in self.nodes.values()), default=0.0)

    @property
    def any_protected_identifiable(self) -> bool:
        return any(flag for table in self.adversary.values() for flag in table.values())


def _empty_decoder(trace) -> dict:
    return {}


def decode(trace: TransmissionTrace) -> DecodeReport:
    """Run the scheme's decoder and the adversary identifiability oracle.

    In noiseless mode every intended receiver must recover its symbols with
    relative residual at most 1e-8; protected symbols must stay unresolvable
    at their adversaries.  Failures are reported, never raised.
    """
    spec = trace.spec
    decoder = _DECODERS.get(spec.scheme_id, _empty_decoder)
    recovered = decoder(trace)

    nodes: dict[str, NodeDecode] = {}
    receivers = [n for n in spec.topology.nodes() if n != EVE]
    for node in receivers:
        intended = spec.message_sids(node)
        got = recovered.get(node, {})
        max_res = 0.0
        for sid in intended:
            truth = trace.true_value(sid)
            if sid not in got:
                max_res = float("inf")
                continue
            err = abs(got[sid] - truth) / max(1.0, abs(truth))
            max_res = max(max_res, float(err))
        nodes[node] = NodeDecode(
            recovered=dict(got),
            max_residual=max_res,
            success=max_res <= DECODE_RESIDUAL_TOL,
        )

    adversary: dict[str, dict[str, bool]] = {}
    if spec.protected:
        system = assemble_effective_system(trace)
        for adv, sids in spec.protected.items():
            known = spec.adversary_known.get(adv, frozenset())
            adversary[adv] = identifiable_symbols(system, adv, sorted(sids), known)
    return DecodeReport(nodes=nodes, adversary=adversary)


__all__ = [
    "AccountingReport",
    "Axis",
    "Comb",
    "DecodeReport",
    "NodeDecode",
    "NullOf",
    "ObsPart",
    "SCHEME_IDS",
    "SUB_PROTOCOLS",
    "SchemeSpec",
    "SlotPlan",
    "StreamRecipe",
    "Sym",
    "TransmissionTrace",
    "accounting",
    "build_scheme",
    "cli_name",
    "composite_accounting",
    "decode",
    "from_cli_name",
    "make_report",
    "run_scheme",
]
