"""Three-stage fusion pipeline over the term algebra.

The pipeline takes the tensor product of two W states (sizes n, m >= 2),
runs the polarization-conditioned probe gate, the path-conditioned probe
gate, and a second polarization-conditioned gate, and enumerates every
measurement branch.  Probabilities are carried both as floats and as exact
fractions; leaves are classified as the fused W state, a recyclable pair of
shrunken W states, or a recyclable merged W state.

Homodyne readout is idealized here: branches are grouped by the absolute
probe phase, the measurement-induced relative phase inside a group is taken
to be removed by the phase corrector, and the probe resets to zero.  The
noisy readout model lives in a separate module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .optics import (
    BranchState,
    ExactAmp,
    FusionTerm,
    PathLabel,
    PhotonState,
    Polarization,
    RegisterContent,
    RegisterKind,
    apply_bs,
    apply_hwp45,
    apply_path_coupler,
    apply_swap,
    cross_kerr_on_path,
    cross_kerr_on_polarization,
    make_branch_state,
    normalize_global_phase,
    probe_linear_shift,
    round_sig12,
    state_to_json_obj,
)

PROB_EPS = 1e-12


@dataclass(frozen=True)
class PhaseClass:
    """Homodyne-distinguishable group of probe phases, |k| in half-angle units."""

    abs_half_theta: int

    def __post_init__(self) -> None:
        if self.abs_half_theta < 0:
            raise ValueError("phase class index must be non-negative")


@dataclass(frozen=True)
class MeasurementBranch:
    phase_class: PhaseClass
    probability: float
    probability_exact: Optional[Fraction]
    post_state: BranchState
    label: str


class LeafKind(Enum):
    SUCCESS = "success"
    RECYCLABLE_PAIR = "recyclable-pair"
    RECYCLABLE_MERGED = "recyclable-merged"


@dataclass(frozen=True)
class LeafClassification:
    kind: LeafKind
    sizes: tuple[int, ...]


@dataclass(frozen=True)
class OutcomeLeaf:
    classification: LeafClassification
    probability: float
    probability_exact: Optional[Fraction]
    state: BranchState


@dataclass(frozen=True)
class StageRecord:
    label: str
    branches: tuple[MeasurementBranch, ...]


@dataclass(frozen=True)
class OutcomeTree:
    n: int
    m: int
    stages: tuple[StageRecord, ...]
    leaves: tuple[OutcomeLeaf, ...]

    def leaf(self, kind: LeafKind) -> OutcomeLeaf:
        for lf in self.leaves:
            if lf.classification.kind is kind:
                return lf
        raise KeyError(kind)

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "stages": [
                {
                    "label": st.label,
                    "branches": [
                        {
                            "phaseClass": br.phase_class.abs_half_theta,
                            "prob": round_sig12(br.probability),
                            "state": state_to_json_obj(br.post_state),
                        }
                        for br in st.branches
                    ],
                }
                for st in self.stages
            ],
            "leaves": [
                {
                    "class": lf.classification.kind.value,
                    "sizes": list(lf.classification.sizes),
                    "cumProb": round_sig12(lf.probability),
                }
                for lf in self.leaves
            ],
        }


def build_input_state(n: int, m: int) -> BranchState:
    """Tensor product of W_n and W_m, written in kept-register form.

    The four components follow from peeling the last photon off each W
    state; a single-photon W register is the lone vertical photon.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 2:
        raise ValueError("m must be >= 2")
    nm = n * m

    def term(reg_a, reg_b, pol1, pol2, weight):
        exact = ExactAmp(1, Fraction(weight, nm))
        return FusionTerm(
            exact.to_complex(),
            reg_a,
            reg_b,
            PhotonState(pol1, PathLabel.UNSPLIT),
            PhotonState(pol2, PathLabel.UNSPLIT),
            0,
            exact,
        )

    all_h_a = RegisterContent.all_horizontal(n - 1)
    all_h_b = RegisterContent.all_horizontal(m - 1)
    w_a = RegisterContent.w_state(n - 1)
    w_b = RegisterContent.w_state(m - 1)
    terms = [
        term(all_h_a, all_h_b, Polarization.V, Polarization.V, 1),
        term(w_a, all_h_b, Polarization.H, Polarization.V, n - 1),
        term(all_h_a, w_b, Polarization.V, Polarization.H, m - 1),
        term(w_a, w_b, Polarization.H, Polarization.H, (n - 1) * (m - 1)),
    ]
    return make_branch_state(terms, n, m)


def homodyne_measure(state: BranchState) -> list[MeasurementBranch]:
    """Group terms by absolute probe phase and collapse each group.

    Post-states are renormalized, the probe resets to zero, and the ideal
    corrector makes the signed phases within a group coherent, so the
    amplitudes carry over unchanged up to the renormalization.
    """
    if not state.terms:
        raise ValueError("cannot measure an empty state")
    groups: dict[int, list[FusionTerm]] = {}
    for t in state.terms:
        groups.setdefault(abs(t.probe_phase), []).append(t)
    branches = []
    total = 0.0
    for abs_k in sorted(groups):
        members = groups[abs_k]
        prob = sum(abs(t.amplitude) ** 2 for t in members)
        total += prob
        prob_exact: Optional[Fraction] = Fraction(0)
        for t in members:
            if t.exact is None:
                prob_exact = None
                break
            prob_exact += t.exact.mag2
        scale = 1.0 / math.sqrt(prob)
        rescale_exact = None if prob_exact in (None, 0) else 1 / prob_exact
        post_terms = []
        for t in members:
            exact = (
                t.exact.scaled_mag2(rescale_exact)
                if (t.exact is not None and rescale_exact is not None)
                else None
            )
            post_terms.append(
                replace(t, amplitude=t.amplitude * scale, probe_phase=0, exact=exact)
            )
        post = normalize_global_phase(
            make_branch_state(post_terms, state.n_party_a, state.m_party_b)
        )
        branches.append(
            MeasurementBranch(
                PhaseClass(abs_k), prob, prob_exact, post, f"phase-class-{abs_k}"
            )
        )
    if abs(total - 1.0) > 1e-9:
        raise ValueError("homodyne requires a normalized state")
    return branches


def step1_polarization_gate(state: BranchState) -> list[MeasurementBranch]:
    """First probe gate: each horizontal photon retards the probe by a full
    angle, then a fixed half-angle advance is applied.

    Branches come back ordered by phase class: the keep branch (|k|=1,
    both-vertical/one-horizontal components) and the drop branch (|k|=3,
    both-horizontal component).
    """
    s = cross_kerr_on_polarization(state, 1, Polarization.H, -2)
    s = cross_kerr_on_polarization(s, 2, Polarization.H, -2)
    s = probe_linear_shift(s, +1)
    return homodyne_measure(s)


def step2_spatial_gate(state: BranchState) -> list[MeasurementBranch]:
    """Path gate: split both photons, phase-tag one path of each, measure.

    Both branches are completed: the nonzero-phase branch gets the path
    swap, then both receive the half-wave plates and the path couplers.
    The two post-states must coincide exactly.
    """
    s = apply_bs(state, 1)
    s = apply_bs(s, 2)
    s = cross_kerr_on_path(s, 1, PathLabel.S11, +2)
    s = cross_kerr_on_path(s, 2, PathLabel.S21, -2)
    out = []
    for br in homodyne_measure(s):
        post = br.post_state
        if br.phase_class.abs_half_theta != 0:
            post = apply_swap(post)
        post = apply_hwp45(post, 1, PathLabel.S11)
        post = apply_hwp45(post, 2, PathLabel.S22)
        post = apply_path_coupler(post, 1)
        post = apply_path_coupler(post, 2)
        out.append(replace(br, post_state=post))
    return out


def step3_polarization_gate(state: BranchState) -> list[MeasurementBranch]:
    """Second probe gate, conditioned on vertical photons this time."""
    s = cross_kerr_on_polarization(state, 1, Polarization.V, -2)
    s = cross_kerr_on_polarization(s, 2, Polarization.V, -2)
    s = probe_linear_shift(s, +1)
    return homodyne_measure(s)


def _branch_by_class(branches: list[MeasurementBranch], abs_k: int) -> MeasurementBranch:
    for br in branches:
        if br.phase_class.abs_half_theta == abs_k:
            return br
    raise ValueError(f"no branch with phase class {abs_k}")


def project_recyclable(state: BranchState) -> LeafClassification:
    """Check the drop branch of the second probe gate and classify it.

    Projecting both photons onto vertical leaves the kept registers in a
    merged W state of n+m-2 photons; the check asserts equal per-position
    amplitudes across the two register patterns.
    """
    n, m = state.n_party_a, state.m_party_b
    if not state.terms:
        raise ValueError("empty state")
    seen = set()
    per_position = None
    for t in state.terms:
        if t.photon1.pol is not Polarization.V or t.photon2.pol is not Polarization.V:
            raise ValueError("photons are not all vertical")
        regs = (t.reg_a.kind, t.reg_b.kind)
        if regs == (RegisterKind.W_STATE, RegisterKind.ALL_HORIZONTAL):
            count = t.reg_a.photon_count
        elif regs == (RegisterKind.ALL_HORIZONTAL, RegisterKind.W_STATE):
            count = t.reg_b.photon_count
        else:
            raise ValueError("unexpected register pattern for a merged W state")
        seen.add(regs)
        amp = t.amplitude / math.sqrt(count)
        if per_position is None:
            per_position = amp
        elif abs(amp - per_position) > PROB_EPS:
            raise ValueError("per-position amplitudes are unequal")
    if len(seen) != 2:
        raise ValueError("merged W state must cover both register patterns")
    return LeafClassification(LeafKind.RECYCLABLE_MERGED, (n + m - 2,))


def run_fusion(n: int, m: int) -> OutcomeTree:
    """Run the full pipeline and collect stages and classified leaves.

    Leaf probabilities are cumulative from the root and sum to one; the
    exact fractions are checked against the float track.
    """
    state0 = build_input_state(n, m)
    stage1_branches = step1_polarization_gate(state0)
    keep1 = _branch_by_class(stage1_branches, 1)
    drop1 = _branch_by_class(stage1_branches, 3)

    stages = [StageRecord("polarization-gate-1", tuple(stage1_branches))]

    pair_leaf = OutcomeLeaf(
        LeafClassification(LeafKind.RECYCLABLE_PAIR, (n - 1, m - 1)),
        drop1.probability,
        drop1.probability_exact,
        drop1.post_state,
    )

    stage2_branches = step2_spatial_gate(keep1.post_state)
    if stage2_branches[0].post_state != stage2_branches[1].post_state:
        raise RuntimeError("spatial branches diverged after the swap")
    stages.append(StageRecord("spatial-gate", tuple(stage2_branches)))

    success_prob = 0.0
    success_exact = Fraction(0)
    merged_prob = 0.0
    merged_exact = Fraction(0)
    success_state = None
    merged_state = None
    for br2 in stage2_branches:
        stage3_branches = step3_polarization_gate(br2.post_state)
        stages.append(
            StageRecord(
                f"polarization-gate-2[via {br2.label}]", tuple(stage3_branches)
            )
        )
        keep3 = _branch_by_class(stage3_branches, 1)
        drop3 = _branch_by_class(stage3_branches, 3)
        if success_state is None:
            success_state = keep3.post_state
            merged_state = drop3.post_state
        elif keep3.post_state != success_state:
            raise RuntimeError("success states differ between spatial branches")
        path_prob = keep1.probability * br2.probability
        success_prob += path_prob * keep3.probability
        merged_prob += path_prob * drop3.probability
        if None not in (
            keep1.probability_exact,
            br2.probability_exact,
            keep3.probability_exact,
            drop3.probability_exact,
        ):
            path_exact = keep1.probability_exact * br2.probability_exact
            success_exact += path_exact * keep3.probability_exact
            merged_exact += path_exact * drop3.probability_exact

    merged_class = project_recyclable(merged_state)
    success_leaf = OutcomeLeaf(
        LeafClassification(LeafKind.SUCCESS, (n + m,)),
        success_prob,
        success_exact,
        success_state,
    )
    merged_leaf = OutcomeLeaf(
        merged_class, merged_prob, merged_exact, merged_state
    )

    leaves = (success_leaf, pair_leaf, merged_leaf)
    total = sum(lf.probability for lf in leaves)
    if abs(total - 1.0) > PROB_EPS:
        raise RuntimeError(f"leaf probabilities sum to {total}, not 1")
    total_exact = sum(
        lf.probability_exact for lf in leaves if lf.probability_exact is not None
    )
    if total_exact != 1:
        raise RuntimeError("exact leaf probabilities do not sum to 1")
    return OutcomeTree(n, m, tuple(stages), leaves)
