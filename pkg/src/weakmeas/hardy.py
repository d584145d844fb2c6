"""The double Mach-Zehnder electron/positron scenario.

Two overlapping interferometers, one for a positron (+) and one for an
electron (-).  Each arm is labeled O ("overlapping") or NO
("non-overlapping"); a pair found in the two O arms annihilates, which is
modeled as exact projection of that branch.  Conditioning runs from the
state surviving the annihilation region (pre-selection) to a coincident
click of both dark detectors D+ and D- (post-selection).

The product basis is ordered (positron arm, electron arm) with NO before O,
i.e. (NO·NO, NO·O, O·NO, O·O).  Eight occupation observables are exposed by
name: four single-particle projectors and four pair products,

    N_minus_X  - electron in arm X            N_plus_X  - positron in arm X
    N_pair_X_Y - positron in arm X and electron in arm Y (product operator).

All of them are diagonal in the arm product basis with eigenvalues {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import prepost, qcore
from .prepost import AblDistribution, PrePostEnsemble, certainty_check, weak_value
from .qcore import Observable, StateVector, inner, op_tensor, tensor

ARMS = ("NO", "O")

SINGLE_NAMES = ("N_minus_O", "N_plus_O", "N_minus_NO", "N_plus_NO")
PAIR_NAMES = ("N_pair_O_O", "N_pair_O_NO", "N_pair_NO_O", "N_pair_NO_NO")
OBSERVABLE_ORDER = SINGLE_NAMES + PAIR_NAMES

TABLE_TOL = 1e-12


@dataclass(frozen=True)
class HardyScenario:
    """Canonical states, ensemble and the eight occupation observables."""

    initial: StateVector
    preselected: StateVector
    postselected: StateVector
    singles: dict[str, Observable]
    pairs: dict[str, Observable]
    ensemble: PrePostEnsemble

    def observables(self) -> dict[str, Observable]:
        return {**self.singles, **self.pairs}

    def observable(self, name: str) -> Observable:
        table = self.observables()
        if name not in table:
            raise KeyError(
                f"unknown observable {name!r}; valid names: {', '.join(OBSERVABLE_ORDER)}")
        return table[name]


@dataclass(frozen=True)
class WeakValueTable:
    """The eight named weak values; all imaginary parts vanish here."""

    entries: dict[str, complex]

    def __post_init__(self):
        for name, value in self.entries.items():
            if abs(value.imag) > TABLE_TOL:
                raise ValueError(f"{name}: unexpected imaginary part {value.imag}")

    def real_values(self) -> dict[str, float]:
        return {name: v.real for name, v in self.entries.items()}


def _arm_basis(label: str) -> StateVector:
    amps = [1.0 if arm == label else 0.0 for arm in ARMS]
    return StateVector(np.array(amps, dtype=complex), ARMS)


def _arm_superposition(sign: float) -> StateVector:
    """(|NO> + sign|O>)/sqrt(2) on one interferometer."""
    return StateVector(np.array([1.0, sign], dtype=complex) / sqrt(2.0), ARMS)


def build() -> HardyScenario:
    """Construct the canonical scenario.

    The beam-splitter superposition signs are hard-coded: free propagation is
    arranged to add no relative phase between the arms.
    """
    plus = _arm_superposition(+1.0)
    minus = _arm_superposition(-1.0)
    initial = tensor(plus, plus)

    # pre-selection: project out the annihilated O·O branch and renormalize
    survived = np.array(initial.amplitudes)
    survived[initial.labels.index("O·O")] = 0.0
    preselected = StateVector(survived, initial.labels).normalized()

    # post-selection: both dark detectors fire
    postselected = tensor(minus, minus)

    ident = Observable.identity(2)
    arm_proj = {arm: qcore.projector(_arm_basis(arm)) for arm in ARMS}
    singles = {
        "N_minus_O": op_tensor(ident, arm_proj["O"]),
        "N_plus_O": op_tensor(arm_proj["O"], ident),
        "N_minus_NO": op_tensor(ident, arm_proj["NO"]),
        "N_plus_NO": op_tensor(arm_proj["NO"], ident),
    }
    pairs = {}
    for p_arm in ARMS:
        for e_arm in ARMS:
            name = f"N_pair_{p_arm}_{e_arm}"
            product = singles[f"N_plus_{p_arm}"].matrix @ singles[f"N_minus_{e_arm}"].matrix
            pairs[name] = Observable.diagonal(np.real(np.diag(product)), name=name)

    singles = {name: Observable(obs.matrix, obs.eigenvalues, obs.projectors, name=name)
               for name, obs in singles.items()}

    scenario = HardyScenario(
        initial=initial,
        preselected=preselected,
        postselected=postselected,
        singles=singles,
        pairs=pairs,
        ensemble=PrePostEnsemble(preselected, postselected),
    )
    _validate(scenario)
    return scenario


def _validate(s: HardyScenario) -> None:
    if abs(s.preselected.amplitude("O·O")) > TABLE_TOL:
        raise AssertionError("annihilated branch survived pre-selection")
    for name, obs in s.observables().items():
        diag = np.diag(obs.matrix)
        if np.max(np.abs(obs.matrix - np.diag(diag))) > TABLE_TOL:
            raise AssertionError(f"{name} is not diagonal in the arm basis")
        if not all(min(abs(d), abs(d - 1.0)) <= TABLE_TOL for d in diag.real):
            raise AssertionError(f"{name} has eigenvalues outside {{0, 1}}")
    for p_arm in ARMS:
        for e_arm in ARMS:
            prod = s.singles[f"N_plus_{p_arm}"].matrix @ s.singles[f"N_minus_{e_arm}"].matrix
            if np.max(np.abs(s.pairs[f"N_pair_{p_arm}_{e_arm}"].matrix - prod)) > TABLE_TOL:
                raise AssertionError("pair operator is not the product of singles")


def weak_value_table(s: HardyScenario) -> WeakValueTable:
    """All eight weak values straight from the defining ratio."""
    entries = {name: weak_value(s.observable(name), s.ensemble).value
               for name in OBSERVABLE_ORDER}
    return WeakValueTable(entries)


def postselection_variants(s: HardyScenario) -> dict[str, StateVector]:
    """Alternative final conditions: detector coincidences plus the O·O branch.

    The O·O branch is orthogonal to the pre-selected state (it is exactly what
    annihilation removed), so selecting it yields a degenerate ensemble.
    """
    plus = _arm_superposition(+1.0)
    minus = _arm_superposition(-1.0)
    variants = {
        "D_plus_D_minus": s.postselected,
        "C_plus_C_minus": tensor(plus, plus),
        "C_plus_D_minus": tensor(plus, minus),
        "D_plus_C_minus": tensor(minus, plus),
        "O_O": tensor(_arm_basis("O"), _arm_basis("O")),
    }
    return variants


@dataclass(frozen=True)
class IdentityChainReport:
    """Operator identities plus the two logical re-derivations of the table."""

    identity_residuals: dict[str, float]
    anchors: dict[str, float]
    derived: dict[str, float]
    appendix_inputs: dict[str, float]
    appendix_pair_value: float
    max_table_deviation: float


def identity_chain(s: HardyScenario) -> IdentityChainReport:
    """Verify the operator identities, then rebuild the table by logic alone.

    Anchors are the three conditionally certain facts (electron in O,
    positron in O, no pair in O·O); additivity of weak values propagates them
    through the identities to all eight entries.  The pair completeness
    identity is also used on its own, appendix-style, to recover the NO·NO
    pair value from the seven certain ones.
    """
    obs = s.observables()
    ident = np.eye(4)
    mat = {name: o.matrix for name, o in obs.items()}
    identities = {
        "electron_arm_completeness": mat["N_minus_O"] + mat["N_minus_NO"] - ident,
        "positron_arm_completeness": mat["N_plus_O"] + mat["N_plus_NO"] - ident,
        "electron_O_pair_split": mat["N_minus_O"] - mat["N_pair_O_O"] - mat["N_pair_NO_O"],
        "positron_O_pair_split": mat["N_plus_O"] - mat["N_pair_O_O"] - mat["N_pair_O_NO"],
        "electron_NO_pair_split": mat["N_minus_NO"] - mat["N_pair_O_NO"] - mat["N_pair_NO_NO"],
        "positron_NO_pair_split": mat["N_plus_NO"] - mat["N_pair_NO_O"] - mat["N_pair_NO_NO"],
        "pair_completeness": (mat["N_pair_O_O"] + mat["N_pair_NO_O"]
                              + mat["N_pair_O_NO"] + mat["N_pair_NO_NO"] - ident),
    }
    residuals = {name: float(np.max(np.abs(m))) for name, m in identities.items()}
    bad = {name: r for name, r in residuals.items() if r > TABLE_TOL}
    if bad:
        raise AssertionError(f"operator identities violated: {bad}")

    anchor_names = ("N_minus_O", "N_plus_O", "N_pair_O_O")
    anchors = {}
    for name in anchor_names:
        eig = certainty_check(obs[name], s.ensemble)
        if eig is None:
            raise AssertionError(f"{name} is not conditionally certain")
        anchors[name] = eig

    derived = dict(anchors)
    derived["N_minus_NO"] = 1.0 - derived["N_minus_O"]
    derived["N_plus_NO"] = 1.0 - derived["N_plus_O"]
    derived["N_pair_NO_O"] = derived["N_minus_O"] - derived["N_pair_O_O"]
    derived["N_pair_O_NO"] = derived["N_plus_O"] - derived["N_pair_O_O"]
    derived["N_pair_NO_NO"] = (1.0 - derived["N_pair_O_O"]
                               - derived["N_pair_NO_O"] - derived["N_pair_O_NO"])

    appendix_inputs = {}
    for name in OBSERVABLE_ORDER:
        if name == "N_pair_NO_NO":
            continue
        eig = certainty_check(obs[name], s.ensemble)
        if eig is None:
            raise AssertionError(f"{name} expected to be conditionally certain")
        appendix_inputs[name] = eig
    appendix_pair_value = (1.0 - appendix_inputs["N_pair_O_O"]
                           - appendix_inputs["N_pair_NO_O"]
                           - appendix_inputs["N_pair_O_NO"])

    table = weak_value_table(s).real_values()
    deviation = max(abs(derived[name] - table[name]) for name in OBSERVABLE_ORDER)
    deviation = max(deviation, abs(appendix_pair_value - table["N_pair_NO_NO"]))
    if deviation > TABLE_TOL:
        raise AssertionError(f"derived table deviates from direct one by {deviation}")

    return IdentityChainReport(
        identity_residuals=residuals,
        anchors=anchors,
        derived={name: derived[name] for name in OBSERVABLE_ORDER},
        appendix_inputs=appendix_inputs,
        appendix_pair_value=appendix_pair_value,
        max_table_deviation=deviation,
    )


@dataclass(frozen=True)
class DetectorStatistics:
    """Unconditional outcome distribution of one run of the interferometers."""

    annihilation: float
    coincidences: dict[str, float]
    dark_pair_given_no_annihilation: float

    def distribution(self) -> dict[str, float]:
        return {"annihilation": self.annihilation, **self.coincidences}


def detector_statistics(s: HardyScenario, interaction: bool = True) -> DetectorStatistics:
    """Detector coincidence probabilities from the initial state.

    C detectors project each particle onto (|NO> + |O>)/sqrt(2), D detectors
    onto (|NO> - |O>)/sqrt(2).  With ``interaction`` the O·O branch is removed
    (annihilation) before the detectors; without it the particles never meet
    and the dark coincidence D+D- is forbidden by interference.
    """
    amps = np.array(s.initial.amplitudes)
    if interaction:
        annihilation = float(abs(s.initial.amplitude("O·O")) ** 2)
        amps[s.initial.labels.index("O·O")] = 0.0
    else:
        annihilation = 0.0
    survivor = StateVector(amps, s.initial.labels)

    plus = _arm_superposition(+1.0)
    minus = _arm_superposition(-1.0)
    ports = {"C_plus": plus, "D_plus": minus}
    ports_e = {"C_minus": plus, "D_minus": minus}
    coincidences = {}
    for p_name, p_state in ports.items():
        for e_name, e_state in ports_e.items():
            key = f"{p_name}_{e_name}"
            amp = inner(tensor(p_state, e_state), survivor)
            coincidences[key] = float(abs(amp) ** 2)

    total = annihilation + sum(coincidences.values())
    if abs(total - 1.0) > TABLE_TOL:
        raise AssertionError(f"detector distribution sums to {total}")
    no_annihilation = 1.0 - annihilation
    conditional = coincidences["D_plus_D_minus"] / no_annihilation
    return DetectorStatistics(
        annihilation=annihilation,
        coincidences=coincidences,
        dark_pair_given_no_annihilation=conditional,
    )


@dataclass(frozen=True)
class IdealMeasurementReport:
    """Conditional statistics of separate ideal measurements of all eight."""

    distributions: dict[str, AblDistribution]
    certainties: dict[str, float | None]


def ideal_measurement_facts(s: HardyScenario) -> IdealMeasurementReport:
    """One ideal intermediate measurement per observable, post-selected.

    Seven of the eight outcomes are certain; the NO·NO pair is the lone
    exception with odds 4/5 : 1/5, which is why its weak value has to come
    from additivity rather than from certainty.
    """
    distributions = {}
    certainties = {}
    for name in OBSERVABLE_ORDER:
        obs = s.observable(name)
        distributions[name] = prepost.abl_probabilities(obs, s.ensemble)
        certainties[name] = certainty_check(obs, s.ensemble)
    for name in OBSERVABLE_ORDER:
        if name == "N_pair_NO_NO":
            if certainties[name] is not None:
                raise AssertionError("N_pair_NO_NO should not be certain")
            dist = distributions[name].as_dict()
            if abs(dist[0.0] - 0.8) > TABLE_TOL or abs(dist[1.0] - 0.2) > TABLE_TOL:
                raise AssertionError(f"N_pair_NO_NO odds {dist} differ from 4/5 : 1/5")
        elif certainties[name] is None:
            raise AssertionError(f"{name} expected to be conditionally certain")
    return IdealMeasurementReport(distributions=distributions, certainties=certainties)
