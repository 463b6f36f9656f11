"""Versioned kinematic templates for the ten monitored activities.

Each template drives one torso scatterer plus four limb oscillators. Torso
trajectories are piecewise-linear range profiles (meters from the sensor);
limbs ride on the torso with sinusoidal offsets. Amplitudes are in meters,
cadences in Hz. Subjects move between 0.8 m and 3.8 m; with limb swing the
composite range always stays inside the simulator's [0.3, 6.0] m envelope.

TEMPLATE_VERSION history:
  1 - initial parameter set
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

TEMPLATE_VERSION = 1

ACTIVITY_IDS = tuple(range(1, 11))

ACTIVITY_NAMES = {
    1: "sit down on chair",
    2: "stand up from chair",
    3: "stand up from chair to walk",
    4: "walk to sit down on chair",
    5: "walk to fall",
    6: "stand up from ground to walk",
    7: "body rotating",
    8: "walking back and forth",
    9: "punching",
    10: "pick up object and drop it back",
}


@dataclass(frozen=True)
class LimbSpec:
    amp_m: float
    cadence_hz: float
    phase: float
    rcs: float = 0.25


@dataclass(frozen=True)
class ActivityTemplate:
    duration_s: float
    torso_knots: tuple[tuple[float, float], ...]  # (time s, range m), spans [0, duration]
    limbs: tuple[LimbSpec, ...]
    torso_osc_amp_m: float = 0.0
    torso_osc_hz: float = 0.0


def _limbs(arm_amp, arm_hz, leg_amp, leg_hz):
    # left/right arms in antiphase; legs in antiphase, offset from the arms
    return (
        LimbSpec(arm_amp, arm_hz, 0.0),
        LimbSpec(arm_amp, arm_hz, pi),
        LimbSpec(leg_amp, leg_hz, pi / 2),
        LimbSpec(leg_amp, leg_hz, 3 * pi / 2),
    )


TEMPLATES: dict[int, ActivityTemplate] = {
    1: ActivityTemplate(  # short monotone descent while settling onto the chair
        duration_s=5.0,
        torso_knots=((0.0, 2.0), (2.0, 2.0), (3.2, 1.55), (5.0, 1.55)),
        limbs=_limbs(0.10, 0.8, 0.06, 0.8),
    ),
    2: ActivityTemplate(  # mirror of activity 1: monotone rise off the chair
        duration_s=5.0,
        torso_knots=((0.0, 1.55), (2.0, 1.55), (3.2, 2.0), (5.0, 2.0)),
        limbs=_limbs(0.10, 0.8, 0.06, 0.8),
    ),
    3: ActivityTemplate(  # rise then walk away from the sensor
        duration_s=7.0,
        torso_knots=((0.0, 1.5), (1.5, 1.5), (2.4, 1.9), (7.0, 3.7)),
        limbs=_limbs(0.18, 1.6, 0.26, 1.6),
    ),
    4: ActivityTemplate(  # approach, slow, settle onto the chair
        duration_s=7.0,
        torso_knots=((0.0, 3.7), (4.0, 1.9), (4.8, 1.55), (7.0, 1.55)),
        limbs=_limbs(0.18, 1.6, 0.26, 1.6),
    ),
    5: ActivityTemplate(  # approach then rapid drop to the ground
        duration_s=6.0,
        torso_knots=((0.0, 3.5), (3.0, 2.0), (3.5, 1.1), (6.0, 1.1)),
        limbs=_limbs(0.18, 1.6, 0.26, 1.6),
    ),
    6: ActivityTemplate(  # long rise from the ground, then walk away
        duration_s=7.0,
        torso_knots=((0.0, 1.2), (1.5, 1.2), (2.8, 2.0), (7.0, 3.6)),
        limbs=_limbs(0.16, 1.5, 0.24, 1.5),
    ),
    7: ActivityTemplate(  # rotation in place: slow alternating torso sway
        duration_s=8.0,
        torso_knots=((0.0, 2.0), (8.0, 2.0)),
        limbs=(
            LimbSpec(0.35, 0.5, 0.0),
            LimbSpec(0.35, 0.5, pi / 2),
            LimbSpec(0.30, 0.5, pi),
            LimbSpec(0.30, 0.5, 3 * pi / 2),
        ),
        torso_osc_amp_m=0.15,
        torso_osc_hz=0.5,
    ),
    8: ActivityTemplate(  # triangular sweep between the 0.8 m and 3.8 m marks
        duration_s=10.0,
        torso_knots=((0.0, 0.8), (2.5, 3.8), (5.0, 0.8), (7.5, 3.8), (10.0, 0.8)),
        limbs=_limbs(0.20, 1.8, 0.30, 1.8),
    ),
    9: ActivityTemplate(  # stationary stance, fast alternating arm thrusts
        duration_s=6.0,
        torso_knots=((0.0, 1.5), (6.0, 1.5)),
        limbs=(
            LimbSpec(0.38, 1.3, 0.0),
            LimbSpec(0.38, 1.3, pi),
            LimbSpec(0.05, 1.3, pi / 2),
            LimbSpec(0.05, 1.3, 3 * pi / 2),
        ),
    ),
    10: ActivityTemplate(  # two dips: pick the object up, then drop it back
        duration_s=8.0,
        torso_knots=(
            (0.0, 2.0), (1.5, 2.0), (2.3, 1.4), (3.1, 2.0),
            (4.5, 2.0), (5.3, 1.4), (6.1, 2.0), (8.0, 2.0),
        ),
        limbs=_limbs(0.22, 0.9, 0.08, 0.9),
    ),
}
