"""Exponential state-of-discharge model and its ON/OFF-modulated variant.

The state of discharge ``F`` (0 = full, 1 = exhausted) grows by integrating
the discharge current over the capacity:

    F(t) = F_init + int_0^t I_sod(u) / C_N du,      I_sod(t) = K * exp(-t/tau)

which closes to ``F(t) = F_init + (K*tau/C_N) * (1 - exp(-t/tau))``, saturated
at 1.  The decay clock of the current advances only while the node is ON:
discharging against an activity trajectory plateaus during OFF segments and
rejoins the continuous curve at equal cumulative active time, so any two
trajectories with the same total ON time end at the identical state of
discharge.

Lead-acid packs lose a constant parasitic gassing current; when a raw current
is supplied instead of the exponential profile, the effective discharge
current is ``I - I_gas`` floored at zero.  The exponential profile above is
already the simplified presentation and bypasses the gassing term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .activity import NodeState, Trajectory, total_on_time
from .occupancy import OccupancySpec, mean_on_time, on_time_density


@dataclass(frozen=True)
class GassingParams:
    """Constant gassing-current inputs: ``I_gas = k_gas * exp(c_u*(V_N + T_N))``.

    A single coefficient ``c_u`` multiplies both the nominal voltage and the
    nominal temperature; the two would normally carry distinct coefficients,
    but the constant-argument form makes ``I_gas`` a plain number either way.
    """

    k_gas: float
    voltage_coeff: float
    nominal_voltage: float
    nominal_temp: float

    def __post_init__(self) -> None:
        if self.k_gas < 0.0:
            raise ValueError(f"k_gas must be >= 0, got {self.k_gas!r}")

    @property
    def gassing_current(self) -> float:
        return self.k_gas * math.exp(
            self.voltage_coeff * self.nominal_voltage + self.voltage_coeff * self.nominal_temp
        )


@dataclass(frozen=True)
class SodModel:
    """Discharge-current parameters: ``I_sod(a) = peak_current * exp(-a/tau)``.

    ``a`` is cumulative active (ON) time.  ``capacity`` is the nominal charge
    capacity scaling current into discharge fraction; ``initial_sod`` is the
    starting state of discharge.
    """

    peak_current: float
    tau: float
    capacity: float
    initial_sod: float = 0.0
    gassing: GassingParams | None = None

    def __post_init__(self) -> None:
        for name, value in (
            ("peak_current", self.peak_current),
            ("tau", self.tau),
            ("capacity", self.capacity),
        ):
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not 0.0 <= self.initial_sod < 1.0:
            raise ValueError(f"initial_sod must lie in [0, 1), got {self.initial_sod!r}")

    @property
    def asymptotic_sod(self) -> float:
        """State of discharge approached as active time grows without bound."""
        return min(1.0, self.initial_sod + self.peak_current * self.tau / self.capacity)

    def effective_current(self, raw_current: float) -> float:
        """Raw current minus the gassing loss, floored at zero."""
        i_gas = self.gassing.gassing_current if self.gassing is not None else 0.0
        return max(raw_current - i_gas, 0.0)


@dataclass(frozen=True)
class BatteryState:
    """Snapshot of a battery: current state of discharge and active time spent.

    Values are evolved functionally; operations hand back new states, never
    mutate.  ``sod`` never decreases (no recovery during OFF) and never
    exceeds 1.
    """

    model: SodModel
    sod: float
    active_time: float

    @classmethod
    def fresh(cls, model: SodModel) -> "BatteryState":
        return cls(model, model.initial_sod, 0.0)

    @property
    def residual_energy(self) -> float:
        """Fraction of capacity still available, ``1 - sod``."""
        return 1.0 - self.sod


def discharge_current(model: SodModel, active_time: float) -> float:
    """Instantaneous discharge current after ``active_time`` of ON time."""
    if active_time < 0.0:
        raise ValueError(f"active_time must be >= 0, got {active_time!r}")
    return model.peak_current * math.exp(-active_time / model.tau)


def sod_continuous(model: SodModel, elapsed: float) -> float:
    """State of discharge after ``elapsed`` of uninterrupted activity.

    Closed form ``min(1, F_init + (K*tau/C_N)*(1 - exp(-elapsed/tau)))``;
    monotone non-decreasing with asymptote ``F_init + K*tau/C_N``.
    """
    if elapsed < 0.0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed!r}")
    drained = model.peak_current * model.tau / model.capacity * -math.expm1(-elapsed / model.tau)
    return min(1.0, model.initial_sod + drained)


def sod_modulated(model: SodModel, traj: Trajectory) -> BatteryState:
    """Discharge along an activity trajectory: drain while ON, plateau while OFF.

    The decay clock advances only during ON segments, so the final state
    equals the continuous curve evaluated at the trajectory's total ON time.
    """
    active = total_on_time(traj)
    return BatteryState(model, sod_continuous(model, active), active)


def advance(state: BatteryState, on_time: float) -> BatteryState:
    """Consume ``on_time`` further active time on top of an existing state."""
    if on_time < 0.0:
        raise ValueError(f"on_time must be >= 0, got {on_time!r}")
    active = state.active_time + on_time
    return BatteryState(state.model, sod_continuous(state.model, active), active)


def active_time_at(traj: Trajectory, wall_time: float) -> float:
    """Cumulative ON time accrued by wall-clock ``wall_time`` within the trajectory."""
    if not 0.0 <= wall_time <= traj.horizon:
        raise ValueError(f"wall_time must lie in [0, {traj.horizon}]")
    active = 0.0
    for seg in traj.segments:
        if seg.state is NodeState.ON:
            overlap = min(wall_time, seg.start + seg.duration) - seg.start
            if overlap > 0.0:
                active += overlap
    return active


def predict_lifetime(model: SodModel, exhaustion_threshold: float) -> float:
    """Active time until the state of discharge reaches the threshold.

    Closed-form inverse of the continuous curve; ``math.inf`` when the
    asymptote never strictly exceeds the threshold.
    """
    if not model.initial_sod < exhaustion_threshold <= 1.0:
        raise ValueError(
            f"exhaustion_threshold must lie in ({model.initial_sod}, 1], "
            f"got {exhaustion_threshold!r}"
        )
    frac = (exhaustion_threshold - model.initial_sod) * model.capacity / (
        model.peak_current * model.tau
    )
    if frac >= 1.0:
        return math.inf
    return -model.tau * math.log1p(-frac)


@dataclass(frozen=True)
class ConsumedFraction:
    """Mean consumed state of discharge, with its plug-in companion.

    ``expected`` integrates the discharge curve against the on-time density;
    ``at_mean_on_time`` evaluates the curve at the mean ON time instead.  The
    curve is concave in active time, so ``expected <= at_mean_on_time``.
    """

    expected: float
    at_mean_on_time: float


def expected_consumed_fraction(model: SodModel, spec: OccupancySpec) -> ConsumedFraction:
    """Average state of discharge at the end of the window ``[0, horizon]``."""
    expected, _ = quad(
        lambda theta: sod_continuous(model, theta) * on_time_density(spec, theta),
        0.0,
        spec.horizon,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=200,
    )
    plug_in = sod_continuous(model, mean_on_time(spec))
    return ConsumedFraction(expected, plug_in)
