"""Gaussian model of the probe's X-quadrature readout.

Convention: a coherent probe of amplitude alpha carrying phase phi shows a
quadrature mean of 2*alpha*cos(phi) with unit-variance Gaussian noise.
Phase classes map to means through phi = |k|*theta/2; discrimination uses a
midpoint threshold between the two class means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import ProbeConfig, round_sig12
from .protocol import PhaseClass

_TWO_PI = 2.0 * math.pi
_SQRT2 = math.sqrt(2.0)

# phase classes the protocol can ask the readout to separate
PROTOCOL_CLASSES = (PhaseClass(0), PhaseClass(1), PhaseClass(2), PhaseClass(3))


def class_mean(probe: ProbeConfig, phase_class: PhaseClass) -> float:
    """Quadrature mean of the probe in the given phase class."""
    return 2.0 * probe.alpha * math.cos(phase_class.abs_half_theta * probe.theta / 2.0)


@dataclass(frozen=True)
class QuadratureModel:
    """Readout statistics for one probe configuration; sigma is fixed at 1."""

    probe: ProbeConfig

    def mean(self, phase_class: PhaseClass) -> float:
        return class_mean(self.probe, phase_class)


def p_error(probe: ProbeConfig, class_a: PhaseClass, class_b: PhaseClass) -> float:
    """Misclassification probability of the midpoint-threshold discriminator."""
    if class_a == class_b:
        raise ValueError("phase classes must be distinct")
    separation = abs(class_mean(probe, class_a) - class_mean(probe, class_b))
    return 0.5 * math.erfc(separation / (2.0 * _SQRT2))


def phase_correction(x: float, probe: ProbeConfig) -> float:
    """Corrector phase applied to horizontal components after a readout x."""
    half = probe.theta / 2.0
    value = 2.0 * probe.alpha * math.sin(half) * (x - 2.0 * probe.alpha * math.cos(half))
    return value % _TWO_PI


def sample_outcome(probe: ProbeConfig, phase_class: PhaseClass, rng_seed: int) -> float:
    """One seeded draw of the quadrature outcome."""
    rng = np.random.default_rng(rng_seed)
    return float(rng.normal(class_mean(probe, phase_class), 1.0))


def sample_outcomes(
    probe: ProbeConfig, phase_class: PhaseClass, count: int, rng_seed: int
) -> np.ndarray:
    """Vectorized counterpart of sample_outcome for statistics."""
    rng = np.random.default_rng(rng_seed)
    return rng.normal(class_mean(probe, phase_class), 1.0, size=count)


@dataclass(frozen=True)
class DiscriminationReport:
    """Operating-point summary for one pair of phase classes."""

    alpha: float
    theta: float
    class_means: dict
    threshold: float
    error_probability: float

    def to_json_obj(self) -> dict:
        return {
            "alpha": round_sig12(self.alpha),
            "theta": round_sig12(self.theta),
            "means": {
                str(pc.abs_half_theta): round_sig12(mu)
                for pc, mu in self.class_means.items()
            },
            "threshold": round_sig12(self.threshold),
            "pError": round_sig12(self.error_probability),
        }


def discrimination_report(
    probe: ProbeConfig,
    class_a: PhaseClass = PhaseClass(0),
    class_b: PhaseClass = PhaseClass(2),
) -> DiscriminationReport:
    """Report the binding discrimination task of the pipeline.

    The default pair is the most closely spaced pair that one readout must
    actually separate, which sets the operating-point error.
    """
    means = {pc: class_mean(probe, pc) for pc in PROTOCOL_CLASSES}
    mu_a = class_mean(probe, class_a)
    mu_b = class_mean(probe, class_b)
    threshold = 0.5 * (mu_a + mu_b)
    if not min(mu_a, mu_b) < threshold < max(mu_a, mu_b):
        raise ValueError("threshold must separate the class means")
    return DiscriminationReport(
        probe.alpha, probe.theta, means, threshold, p_error(probe, class_a, class_b)
    )
