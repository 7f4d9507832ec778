"""Human readable and structured reports of generate and fig2 runs."""

from typing import Any, Dict, List, Sequence

import json
import math

import attr

from .circuit import (
    CLAIMED_FIG2_PROBABILITY,
    COMPETING_SCHEME_PROBABILITY,
    CircuitOutcome,
    fig2_default_angles,
    fig2_oracle_probability,
    fig2_reference_states,
    run_chain,
    run_fig2,
)
from .compiler import SchemeParams, compile_target
from .config import SYMMETRIC_TRANSMITTANCE, Tolerances
from .decompose import Decomposition, TargetSpec
from .exceptions import TargetSpecError
from .fock import BSParams, fidelity
from .logging import logger

GENERATE_KIND = "generate"
FIG2_KIND = "fig2"


def _pair(value: complex) -> List[float]:
    return [value.real, value.imag]


def _angles(params: Sequence[BSParams]) -> List[Dict[str, float]]:
    return [{"theta": p.theta, "phi": p.phi} for p in params]


def _number(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.15g}"
    if isinstance(value, complex):
        return f"{value.real:.15g}{value.imag:+.15g}j"
    return str(value)


@attr.s(frozen=True, auto_attribs=True)
class GenerateReport:
    """Everything a generate run produced.

    Args:
        target: requested target state.
        decomposition: roots and ideal beam splitters of the target.
        scheme: solved chain parameters.
        outcome: simulated heralded run of ``scheme``.
        fidelity_threshold: smallest fidelity that passes.
        seed: multi-start seed used by the solver.
    """

    target: TargetSpec
    decomposition: Decomposition
    scheme: SchemeParams
    outcome: CircuitOutcome
    fidelity_threshold: float
    seed: int = 0

    @property
    def fidelity(self) -> float:
        """Fidelity of the heralded output against the target."""
        return float(self.outcome.fidelity_vs_target)

    @property
    def passed(self) -> bool:
        """Whether the run reached the fidelity threshold."""
        return self.fidelity >= self.fidelity_threshold

    def to_dict(self) -> Dict[str, Any]:
        """Structured form of the report, floats kept at full precision."""
        return {
            "kind": GENERATE_KIND,
            "n_total": self.target.n_total,
            "transmittance": self.scheme.transmittance,
            "seed": self.seed,
            "target": [_pair(c) for c in self.target.coefficients],
            "roots": [_pair(r) for r in self.decomposition.roots],
            "infinite_roots": self.decomposition.infinite_roots,
            "ideal_params": _angles(self.decomposition.ideal_params),
            "scheme": _angles(self.scheme.stages),
            "stage_probabilities": list(self.outcome.stage_probabilities),
            "success_probability": self.outcome.success_probability,
            "raw_norm_sq": self.outcome.raw_norm_sq,
            "fidelity": self.fidelity,
            "fidelity_threshold": self.fidelity_threshold,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        """Serialize to a JSON document that ``load_scheme`` reads back exactly."""
        return json.dumps(self.to_dict(), indent=2)

    def render_text(self) -> str:
        """Plain text report."""
        lines = [
            f"target: N = {self.target.n_total}, T = {_number(self.scheme.transmittance)}",
            "roots:",
        ]
        lines += [f"  beta_{i} = {_number(r)}" for i, r in enumerate(self.decomposition.roots, 1)]
        if self.decomposition.infinite_roots:
            lines.append(f"  {self.decomposition.infinite_roots} root(s) at infinity")
        lines.append("ideal beam splitters (theta, phi):")
        lines += [
            f"  {j}: {_number(p.theta)}, {_number(p.phi)}"
            for j, p in enumerate(self.decomposition.ideal_params, 1)
        ]
        lines.append("scheme beam splitters (theta', phi'):")
        lines += [
            f"  {k}: {_number(p.theta)}, {_number(p.phi)}"
            for k, p in enumerate(self.scheme.stages, 1)
        ]
        lines.append("stage probabilities:")
        lines += [
            f"  detector {k}: {_number(p)}"
            for k, p in enumerate(self.outcome.stage_probabilities, 1)
        ]
        lines += [
            f"success probability: {_number(self.outcome.success_probability)}",
            f"raw norm squared: {_number(self.outcome.raw_norm_sq)}",
            f"fidelity: {_number(self.fidelity)}",
            f"status: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines)


def generate_report(
    target: TargetSpec,
    transmittance: float = SYMMETRIC_TRANSMITTANCE,
    tolerances: Tolerances = Tolerances(),
    seed: int = 0,
) -> GenerateReport:
    """Decompose, compile and simulate ``target`` end to end."""
    decomposition, scheme = compile_target(target, transmittance, tolerances, seed)
    outcome = run_chain(scheme, target)
    report = GenerateReport(
        target=target,
        decomposition=decomposition,
        scheme=scheme,
        outcome=outcome,
        fidelity_threshold=tolerances.fidelity_threshold,
        seed=seed,
    )
    if not report.passed:
        logger.warning(
            "fidelity below threshold",
            fidelity=report.fidelity,
            threshold=report.fidelity_threshold,
        )
    return report


def load_scheme(text: str) -> SchemeParams:
    """Read the scheme back from a structured generate report.

    Raises:
        TargetSpecError: if ``text`` is not a generate report.
    """
    try:
        document = json.loads(text)
        if document.get("kind") != GENERATE_KIND:
            raise TargetSpecError(f"Expected a {GENERATE_KIND} report, got {document.get('kind')}")
        stages = [BSParams(theta=s["theta"], phi=s["phi"]) for s in document["scheme"]]
        return SchemeParams(stages=stages, transmittance=document["transmittance"])
    except (ValueError, KeyError, TypeError, AttributeError) as err:
        raise TargetSpecError(f"Cannot parse scheme from report: {err}") from err


@attr.s(frozen=True, auto_attribs=True)
class Fig2Report:
    """Result of the simplified four-photon scheme next to the quoted probabilities."""

    outcome: CircuitOutcome
    transmittance: float = SYMMETRIC_TRANSMITTANCE

    @property
    def intermediate_fidelities(self) -> Dict[str, float]:
        """Fidelity of each snapshot against its reference state."""
        references = fig2_reference_states()
        return {
            name: fidelity(self.outcome.snapshots[name], reference)
            for name, reference in references.items()
        }

    @property
    def oracle_probability(self) -> float:
        """Ladder-algebra value of the heralding probability."""
        return fig2_oracle_probability(self.transmittance)

    def to_dict(self) -> Dict[str, Any]:
        """Structured form of the report."""
        return {
            "kind": FIG2_KIND,
            "transmittance": self.transmittance,
            "fidelities": self.intermediate_fidelities,
            "stage_probabilities": list(self.outcome.stage_probabilities),
            "success_probability": self.outcome.success_probability,
            "raw_norm_sq": self.outcome.raw_norm_sq,
            "oracle_probability": self.oracle_probability,
            "claimed_probability": CLAIMED_FIG2_PROBABILITY,
            "competing_scheme_probability": COMPETING_SCHEME_PROBABILITY,
        }

    def to_json(self) -> str:
        """Serialize to JSON."""
        return json.dumps(self.to_dict(), indent=2)

    def render_text(self) -> str:
        """Plain text report."""
        lines = ["four-photon scheme, fidelity against the expected states:"]
        lines += [f"  {name}: {_number(f)}" for name, f in self.intermediate_fidelities.items()]
        lines += [
            f"simulated success probability: {_number(self.outcome.success_probability)}",
            f"ladder-algebra value: {_number(self.oracle_probability)}",
            f"claimed success probability: {_number(CLAIMED_FIG2_PROBABILITY)}",
            f"competing scheme probability: {_number(COMPETING_SCHEME_PROBABILITY)}",
        ]
        return "\n".join(lines)


def fig2_report(transmittance: float = SYMMETRIC_TRANSMITTANCE) -> Fig2Report:
    """Run the four-photon scheme and compare its probability with the quoted values."""
    outcome = run_fig2(fig2_default_angles(transmittance))
    report = Fig2Report(outcome=outcome, transmittance=transmittance)
    gap = abs(outcome.success_probability - CLAIMED_FIG2_PROBABILITY)
    if not math.isclose(outcome.success_probability, CLAIMED_FIG2_PROBABILITY):
        logger.warning(
            "simulated probability differs from the claimed value",
            simulated=outcome.success_probability,
            claimed=CLAIMED_FIG2_PROBABILITY,
            gap=gap,
        )
    return report
