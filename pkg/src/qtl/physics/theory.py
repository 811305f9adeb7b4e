"""
Closed-form equilibrium predictions.

Energies enter exponentials as grid index times the spectrum quantum, so
alpha and beta come out in units of 1/dE. Natural units: k_B = 1.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np
import structlog
from scipy.special import softmax, xlogy

from qtl.core.exceptions import PhysicsError, ValidationError
from qtl.physics.spectra import CompositeSystem, Spectrum
from qtl.physics.states import DensityOperator

logger = structlog.get_logger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
RENORMALIZATION_RESIDUAL = 1e-10
PROBABILITY_FLOOR = 1e-12


class Subsystem(str, Enum):
    GAS = "gas"
    CONTAINER = "container"


@dataclass(frozen=True)
class LevelDistribution:
    """Probabilities indexed by the levels of one spectrum."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if weights.size == 0:
            raise ValidationError("Level distribution is empty")
        if np.any(weights < 0.0):
            raise ValidationError("Level distribution has negative weights")
        total = float(weights.sum())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValidationError("Level distribution is not normalized", details={"sum": total})
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, index: int) -> float:
        return float(self.weights[index])


@dataclass(frozen=True)
class TotalEnergyDistribution:
    """W(E) over existing shell energies."""

    probabilities: Mapping[int, float]

    def __post_init__(self) -> None:
        values = np.array(list(self.probabilities.values()), dtype=np.float64)
        if np.any(values < 0.0):
            raise ValidationError("Total-energy distribution has negative probabilities")
        if abs(float(values.sum()) - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValidationError("Total-energy distribution is not normalized")
        object.__setattr__(
            self, "probabilities", {int(e): float(p) for e, p in sorted(self.probabilities.items())}
        )

    def __getitem__(self, energy: int) -> float:
        return self.probabilities.get(int(energy), 0.0)


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares fit ln N_B = ln N0 + alpha E_B."""

    alpha: float
    n0: float
    residual: float

    @property
    def is_exact(self) -> bool:
        return self.residual < 1e-9


def as_distribution(weights: LevelDistribution | Sequence[float], spectrum: Spectrum) -> LevelDistribution:
    """Coerce weights to a validated distribution over ``spectrum``'s levels."""
    distribution = weights if isinstance(weights, LevelDistribution) else LevelDistribution(np.asarray(weights))
    if len(distribution) != len(spectrum):
        raise ValidationError(
            "Distribution length does not match spectrum",
            details={"levels": len(spectrum), "weights": len(distribution)},
        )
    return distribution


def min_purity(weights: LevelDistribution | Sequence[float], gas: Spectrum) -> float:
    """P_min = sum_A W_A^2 / N_A."""
    w = as_distribution(weights, gas).weights
    return float(np.sum(w**2 / gas.degeneracies))


def hs_average_purity_exact(
    gas_weights: LevelDistribution | Sequence[float],
    container_weights: LevelDistribution | Sequence[float],
    gas: Spectrum,
    container: Spectrum,
) -> float:
    """
    Hilbert-space average of the gas purity over the accessible region.

    Three-term expression with the exact denominator N_A N_B + 1.
    """
    wa = as_distribution(gas_weights, gas).weights
    wb = as_distribution(container_weights, container).weights
    na = gas.degeneracies.astype(np.float64)
    nb = container.degeneracies.astype(np.float64)

    sum_a = float(np.sum(wa**2))
    sum_b = float(np.sum(wb**2))
    gas_term = float(np.sum(wa**2 / na)) * (1.0 - sum_b)
    container_term = float(np.sum(wb**2 / nb)) * (1.0 - sum_a)
    cross = np.outer(wa**2, wb**2) * (na[:, None] + nb[None, :]) / (np.outer(na, nb) + 1.0)
    return gas_term + container_term + float(cross.sum())


def hs_average_purity_approx(
    gas_weights: LevelDistribution | Sequence[float],
    container_weights: LevelDistribution | Sequence[float],
    gas: Spectrum,
    container: Spectrum,
) -> float:
    """Large-degeneracy form: sum_A W_A^2/N_A + sum_B W_B^2/N_B."""
    return min_purity(gas_weights, gas) + min_purity(container_weights, container)


def hs_average_purity_dominant(
    gas_dominant: LevelDistribution | Sequence[float],
    container_dominant: LevelDistribution | Sequence[float],
    gas: Spectrum,
    container: Spectrum,
) -> float:
    """Purity average over the dominant region (approximate form with dominant weights)."""
    return hs_average_purity_approx(gas_dominant, container_dominant, gas, container)


def max_entropy(weights: LevelDistribution | Sequence[float], gas: Spectrum) -> float:
    """S_max = -sum_A W_A ln(W_A / N_A); empty levels contribute zero."""
    w = as_distribution(weights, gas).weights
    return float(-np.sum(xlogy(w, w)) + np.sum(w * np.log(gas.degeneracies)))


def total_energy_distribution(
    gas_weights: LevelDistribution | Sequence[float],
    container_weights: LevelDistribution | Sequence[float],
    composite: CompositeSystem,
) -> TotalEnergyDistribution:
    """W(E) = sum over (A, B) in shell E of W_A W_B (product initial state)."""
    wa = as_distribution(gas_weights, composite.gas).weights
    wb = as_distribution(container_weights, composite.container).weights
    probabilities = {
        energy: float(sum(wa[a] * wb[b] for a, b in pairs))
        for energy, pairs in composite.shells.items()
    }
    return TotalEnergyDistribution(probabilities)


def dominant_distribution(
    energy_distribution: TotalEnergyDistribution,
    composite: CompositeSystem,
    subsystem: Subsystem | str = Subsystem.GAS,
) -> LevelDistribution:
    """
    Dominant level distribution of one subsystem.

    W^d_A = N_A * sum_E N^c(E - E_A) W(E) / N(E); for the container the roles
    of the two spectra are exchanged.
    """
    subsystem = Subsystem(subsystem)
    own, other = (
        (composite.gas, composite.container)
        if subsystem is Subsystem.GAS
        else (composite.container, composite.gas)
    )

    weights = np.zeros(len(own), dtype=np.float64)
    for energy, probability in energy_distribution.probabilities.items():
        if probability == 0.0:
            continue
        if energy not in composite.shells:
            raise ValidationError(f"W(E) has weight on E={energy}, which is not a shell energy")
        shell = composite.shell_degeneracy(energy)
        for index, level in enumerate(own.levels):
            weights[index] += level.degeneracy * other.degeneracy_at(energy - level.energy) * probability / shell

    residual = abs(float(weights.sum()) - 1.0)
    if residual > RENORMALIZATION_RESIDUAL:
        raise PhysicsError(
            "Dominant distribution is not normalized",
            details={"residual": residual},
        )
    return LevelDistribution(weights / weights.sum())


def canonical_distribution(gas: Spectrum, alpha: float) -> LevelDistribution:
    """W_A = N_A exp(-alpha E_A) / Z."""
    if not np.isfinite(alpha):
        raise ValidationError(f"alpha must be finite, got {alpha}")
    log_weights = np.log(gas.degeneracies) - alpha * gas.energies * gas.quantum
    return LevelDistribution(softmax(log_weights))


def equilibrium_state(weights: LevelDistribution | Sequence[float], gas: Spectrum) -> DensityOperator:
    """Diagonal state giving each of the N_A states of level A the weight W_A / N_A."""
    w = as_distribution(weights, gas).weights
    diagonal = np.repeat(w / gas.degeneracies, gas.degeneracies)
    return DensityOperator(np.diag(diagonal).astype(np.complex128))


def spectral_temperature(
    levels: Sequence[tuple[float, int, float]],
    floor: float = PROBABILITY_FLOOR,
) -> float:
    """
    Inverse spectral temperature beta = 1 / (k_B T).

    Args:
        levels: (energy, degeneracy, probability) per level, ascending in energy
        floor: Probabilities below this are clamped before taking logs

    Returns:
        beta in units of 1/energy
    """
    if len(levels) < 2:
        raise ValidationError("Spectral temperature needs at least two levels")
    energies = np.array([level[0] for level in levels], dtype=np.float64)
    degeneracies = np.array([level[1] for level in levels], dtype=np.float64)
    probabilities = np.array([level[2] for level in levels], dtype=np.float64)

    if np.any(np.diff(energies) <= 0.0):
        raise ValidationError("Spectral temperature levels must be strictly ascending")
    if np.any(degeneracies < 1):
        raise ValidationError("Degeneracies must be positive")
    if np.any(probabilities < 0.0) or abs(float(probabilities.sum()) - 1.0) > 1e-9:
        raise ValidationError("Level probabilities must be non-negative and normalized")

    norm = 1.0 - 0.5 * (probabilities[0] + probabilities[-1])
    if norm < 1e-12:
        raise PhysicsError(
            "Spectral temperature is undefined: all weight sits on the extreme levels",
            details={"prefactor": norm},
        )

    w = np.maximum(probabilities, floor)
    pair_weights = 0.5 * (probabilities[1:] + probabilities[:-1])
    slopes = (np.diff(np.log(w)) - np.diff(np.log(degeneracies))) / np.diff(energies)
    return float(-np.sum(pair_weights * slopes) / norm)


def spectral_temperature_of(weights: LevelDistribution | Sequence[float], spectrum: Spectrum) -> float:
    """Spectral temperature of a level distribution over ``spectrum``."""
    w = as_distribution(weights, spectrum).weights
    return spectral_temperature(
        [
            (level.energy * spectrum.quantum, level.degeneracy, float(p))
            for level, p in zip(spectrum.levels, w)
        ]
    )


def fit_exponential_degeneracy(container: Spectrum) -> ExponentialFit:
    """Fit N_B = N0 exp(alpha E_B) by least squares on ln N_B."""
    if len(container) < 2:
        raise ValidationError("Exponential fit needs at least two container levels")
    energies = container.energies * container.quantum
    log_n = np.log(container.degeneracies.astype(np.float64))
    alpha, intercept = np.polyfit(energies, log_n, 1)
    residual = float(np.max(np.abs(log_n - (alpha * energies + intercept))))
    return ExponentialFit(alpha=float(alpha), n0=float(np.exp(intercept)), residual=residual)


def predicted_distribution(
    composite: CompositeSystem,
    gas_weights: LevelDistribution | Sequence[float],
    container_weights: LevelDistribution | Sequence[float],
    energy_exchange: bool = True,
    subsystem: Subsystem | str = Subsystem.GAS,
) -> LevelDistribution:
    """
    Equilibrium level distribution predicted for a product initial state.

    Without energy exchange the initial marginal is conserved; otherwise the
    dominant distribution of the conserved W(E) applies.
    """
    subsystem = Subsystem(subsystem)
    if not energy_exchange:
        initial = gas_weights if subsystem is Subsystem.GAS else container_weights
        spectrum = composite.gas if subsystem is Subsystem.GAS else composite.container
        return as_distribution(initial, spectrum)
    energy = total_energy_distribution(gas_weights, container_weights, composite)
    return dominant_distribution(energy, composite, subsystem)


@dataclass(frozen=True)
class Prediction:
    """Every closed-form number for one scenario."""

    gas_weights: np.ndarray
    container_weights: np.ndarray
    min_purity: float
    hs_average_purity_exact: float
    hs_average_purity_approx: float
    max_entropy: float
    energy_distribution: dict[int, float]
    fit: Optional[ExponentialFit] = None
    canonical_weights: Optional[np.ndarray] = None
    spectral_beta: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    def rows(self) -> list[tuple[str, object]]:
        """Flat key/value rows in a stable order."""
        rows: list[tuple[str, object]] = [
            ("min_purity", self.min_purity),
            ("hs_average_purity_exact", self.hs_average_purity_exact),
            ("hs_average_purity_approx", self.hs_average_purity_approx),
            ("max_entropy", self.max_entropy),
        ]
        rows += [(f"equilibrium_W_g_{i}", float(w)) for i, w in enumerate(self.gas_weights)]
        rows += [(f"equilibrium_W_c_{i}", float(w)) for i, w in enumerate(self.container_weights)]
        rows += [(f"W_E_{e}", p) for e, p in self.energy_distribution.items()]
        if self.fit is not None:
            rows += [
                ("alpha", self.fit.alpha),
                ("N0", self.fit.n0),
                ("fit_residual", self.fit.residual),
            ]
        if self.canonical_weights is not None:
            rows += [(f"canonical_W_g_{i}", float(w)) for i, w in enumerate(self.canonical_weights)]
        if self.spectral_beta is not None:
            rows.append(("spectral_beta", self.spectral_beta))
        return rows


def predict(
    composite: CompositeSystem,
    gas_weights: LevelDistribution | Sequence[float],
    container_weights: LevelDistribution | Sequence[float],
    energy_exchange: bool = True,
) -> Prediction:
    """
    Aggregate the closed-form predictions for a product initial state.

    Purities and entropies are evaluated on the predicted (equilibrium)
    distributions of both subsystems.
    """
    gas_eq = predicted_distribution(composite, gas_weights, container_weights, energy_exchange, Subsystem.GAS)
    container_eq = predicted_distribution(
        composite, gas_weights, container_weights, energy_exchange, Subsystem.CONTAINER
    )
    gas, container = composite.gas, composite.container
    notes: list[str] = []
    average_approx = hs_average_purity_dominant if energy_exchange else hs_average_purity_approx

    fit = None
    canonical = None
    if len(container) >= 2:
        fit = fit_exponential_degeneracy(container)
        if fit.is_exact:
            canonical = canonical_distribution(gas, fit.alpha).weights
    else:
        notes.append("single-level container: no exponential fit")

    beta = None
    if len(gas) >= 2:
        try:
            beta = spectral_temperature_of(gas_eq, gas)
        except PhysicsError as e:
            notes.append(str(e))

    prediction = Prediction(
        gas_weights=gas_eq.weights,
        container_weights=container_eq.weights,
        min_purity=min_purity(gas_eq, gas),
        hs_average_purity_exact=hs_average_purity_exact(gas_eq, container_eq, gas, container),
        hs_average_purity_approx=average_approx(gas_eq, container_eq, gas, container),
        max_entropy=max_entropy(gas_eq, gas),
        energy_distribution=dict(
            total_energy_distribution(gas_weights, container_weights, composite).probabilities
        ),
        fit=fit,
        canonical_weights=canonical,
        spectral_beta=beta,
        notes=notes,
    )
    logger.debug("Prediction computed", min_purity=prediction.min_purity, max_entropy=prediction.max_entropy)
    return prediction
