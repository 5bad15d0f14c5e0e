from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .exceptions import ExponentOutOfRangeError, ConstraintViolatedError, DegenerateProfileError, \
    NonZeroMeanError, OmegaOutOfRangeError, NoSolitaryWavesError
from .spectral import FloatArray, Field, Grid, deriv, inner, normL2, projectZeroMean, MEAN_TOLERANCE


__all__ = [
    'ModelFamily',
    'WaveProfile',
    'CoefficientScaling',
    'CONSTRAINT_TOLERANCE',
    'PROFILE_CONSTRAINT_TOLERANCE',
    'energySecondOrder',
    'energyFourthOrder',
    'gradientSecondOrder',
    'omegaMultiplier',
    'omegaMultiplierFourthOrder',
    'omegaFromResidualFit',
    'secondOrderResidual',
    'fourthOrderResidual',
    'elResidualSecondOrder',
    'elResidualFourthOrder',
    'fourthOrderWave',
    'reduceCoefficients',
]


CONSTRAINT_TOLERANCE = 1e-8
PROFILE_CONSTRAINT_TOLERANCE = 1e-10


class ModelFamily(Enum):
    """
    The two nonlinearities of the generalized model. AbsPower uses |u|^p, SignedPower uses |u|^(p-1) u.
    """
    AbsPower = 'abs'
    SignedPower = 'signed'

    @classmethod
    def fromName(cls, name: Union[str, 'ModelFamily']) -> 'ModelFamily':
        if isinstance(name, ModelFamily):
            return name

        for member in cls:
            if name in (member.value, member.name):
                return member

        raise ValueError(f'Unknown model family ({name}), expected one of {[m.value for m in cls]}')

    @property
    def pRange(self) -> Tuple[float, float]:
        if self is ModelFamily.AbsPower:
            return 1.0, 3.0
        return 1.0, 5.0

    def checkExponent(self, p: float) -> None:
        low, high = self.pRange

        if not low < p < high:
            raise ExponentOutOfRangeError(self.value, p, low, high)

    def nonlinearity(self, u: FloatArray, p: float) -> FloatArray:
        """N(u), the derivative of the energy density."""
        magnitude = np.abs(u)

        if self is ModelFamily.AbsPower:
            return np.asarray(magnitude ** p, dtype=np.float64)
        return np.asarray(magnitude ** (p - 1.0) * u, dtype=np.float64)

    def potentialDensity(self, u: FloatArray, p: float) -> FloatArray:
        """F(u) with F' = N."""
        magnitude = np.abs(u)

        if self is ModelFamily.AbsPower:
            return np.asarray(magnitude ** p * u / (p + 1.0), dtype=np.float64)
        return np.asarray(magnitude ** (p + 1.0) / (p + 1.0), dtype=np.float64)

    def linearizedPotential(self, u: FloatArray, p: float) -> FloatArray:
        """N'(u); for AbsPower written as p sign(u) |u|^(p-1), continuous for p > 1."""
        magnitude = np.abs(u)

        if self is ModelFamily.AbsPower:
            return np.asarray(p * np.sign(u) * magnitude ** (p - 1.0), dtype=np.float64)
        return np.asarray(p * magnitude ** (p - 1.0), dtype=np.float64)

    def nonlinearPairing(self, u: Field, p: float) -> float:
        """Integral of N(u) u."""
        return float(u.grid.spacing * np.dot(self.nonlinearity(u.values, p), u.values))


def _checkMeanFree(u: Field) -> None:
    if not u.meanFree and not u.meanIsNegligible():
        raise NonZeroMeanError(u.mean, MEAN_TOLERANCE * u.maxAbs)


@dataclass(frozen=True)
class WaveProfile:
    family: ModelFamily
    p: float
    lam: float
    omega: float
    phi: Field
    elResidual: float
    iterations: int = 0
    mValue: Optional[float] = None

    def __post_init__(self) -> None:
        self.family.checkExponent(self.p)

        if not self.lam > 0:
            raise ValueError(f'lambda must be positive ({self.lam})')

        normSquared = normL2(self.phi) ** 2

        if abs(normSquared - self.lam) > PROFILE_CONSTRAINT_TOLERANCE * self.lam:
            raise ConstraintViolatedError(normSquared, self.lam)

        if not self.omega < 2.0:
            raise OmegaOutOfRangeError(self.omega)

        _checkMeanFree(self.phi)

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    @property
    def energy(self) -> float:
        return energySecondOrder(self.phi, self.family, self.p)

    @property
    def reportedEnergy(self) -> float:
        """The minimum energy recorded by the solver, recomputed only for profiles built without one."""
        return self.mValue if self.mValue is not None else self.energy

    @property
    def derivative(self) -> Field:
        return deriv(self.phi, 1)

    @property
    def antiderivative(self) -> Field:
        return deriv(self.phi, -1)

    @property
    def label(self) -> str:
        return f'{self.family.value}_p{self.p:g}_lam{self.lam:g}'


def energySecondOrder(u: Field, family: ModelFamily, p: float) -> float:
    quadratic = normL2(deriv(u, 1)) ** 2 + normL2(deriv(u, -1)) ** 2
    nonlinear = u.grid.spacing * float(np.sum(family.potentialDensity(u.values, p)))
    return 0.5 * quadratic - nonlinear


def energyFourthOrder(v: Field, family: ModelFamily, p: float) -> float:
    slope = deriv(v, 1)
    quadratic = normL2(deriv(v, 2)) ** 2 + normL2(v) ** 2
    nonlinear = v.grid.spacing * float(np.sum(family.potentialDensity(slope.values, p)))
    return 0.5 * quadratic - nonlinear


def gradientSecondOrder(u: Field, family: ModelFamily, p: float) -> Field:
    """
    L2 gradient on the mean-free subspace: P[-u'' - d^-2 u - N(u)] where P removes the mean.

    :param u: the point to evaluate at, must be mean-free
    :type u: Field
    :param family: nonlinearity family
    :type family: ModelFamily
    :param p: exponent
    :type p: float
    :return: the gradient field
    :rtype: Field
    """
    linear = -deriv(u, 2).values - deriv(u, -2).values
    nonlinear = projectZeroMean(u.withValues(family.nonlinearity(u.values, p), False))
    return Field(u.grid, linear - nonlinear.values, True)


def _quadraticParts(u: Field) -> float:
    return normL2(deriv(u, 1)) ** 2 + normL2(deriv(u, -1)) ** 2


def omegaMultiplier(u: Field, lam: float, family: ModelFamily, p: float) -> float:
    normSquared = normL2(u) ** 2

    if abs(normSquared - lam) > CONSTRAINT_TOLERANCE * lam:
        raise ConstraintViolatedError(normSquared, lam)

    return (_quadraticParts(u) - family.nonlinearPairing(u, p)) / lam


def omegaMultiplierFourthOrder(v: Field, lam: float, family: ModelFamily, p: float) -> float:
    slope = deriv(v, 1)
    normSquared = normL2(slope) ** 2

    if abs(normSquared - lam) > CONSTRAINT_TOLERANCE * lam:
        raise ConstraintViolatedError(normSquared, lam)

    quadratic = normL2(deriv(v, 2)) ** 2 + normL2(v) ** 2
    return (quadratic - family.nonlinearPairing(slope, p)) / lam


def _residualOperator(phi: Field, family: ModelFamily, p: float) -> Field:
    """phi'' + d^-2 phi + P N(phi), the multiplier-free part of the profile equation."""
    nonlinear = projectZeroMean(phi.withValues(family.nonlinearity(phi.values, p), False))
    return Field(phi.grid, deriv(phi, 2).values + deriv(phi, -2).values + nonlinear.values, True)


def omegaFromResidualFit(phi: Field, family: ModelFamily, p: float) -> float:
    """Least-squares multiplier of the profile equation, regressing the operator part against -phi."""
    target = _residualOperator(phi, family, p).values
    solution, *_ = np.linalg.lstsq(-phi.values[:, np.newaxis], target, rcond=None)
    return float(solution[0])


def secondOrderResidual(phi: Field, omega: float, family: ModelFamily, p: float) -> float:
    norm = normL2(phi)

    if norm == 0.0:
        raise DegenerateProfileError('Residual of the zero field is undefined')

    residual = _residualOperator(phi, family, p) + omega * phi
    return normL2(residual) / norm


def fourthOrderResidual(phi: Field, omega: float, family: ModelFamily, p: float) -> float:
    wave = deriv(phi, -1)
    norm = normL2(wave)

    if norm == 0.0:
        raise DegenerateProfileError('Fourth order residual of the zero field is undefined')

    slope = deriv(wave, 1)
    flux = deriv(slope.withValues(family.nonlinearity(slope.values, p), False), 1)

    residual = deriv(wave, 4).values + omega * deriv(wave, 2).values + wave.values + flux.values
    return float(np.sqrt(phi.grid.spacing * np.dot(residual, residual))) / norm


def elResidualSecondOrder(profile: WaveProfile) -> float:
    return secondOrderResidual(profile.phi, profile.omega, profile.family, profile.p)


def elResidualFourthOrder(profile: WaveProfile) -> float:
    return fourthOrderResidual(profile.phi, profile.omega, profile.family, profile.p)


def fourthOrderWave(profile: WaveProfile) -> Field:
    return profile.antiderivative


@dataclass(frozen=True)
class CoefficientScaling:
    """
    A solution U of the normalized model gives u(x, t) = amplitude * U(x / space, t / time) of the model with
    general coefficients. ``sign`` is the coefficient left on the nonlinear term (always 1 for AbsPower).
    """
    time: float
    space: float
    amplitude: float
    sign: int


def reduceCoefficients(beta: float, sigma: float, gamma: float, family: ModelFamily, p: float) -> CoefficientScaling:
    """Scalings mapping (u_t - beta u_xxx - sigma N(u)_x)_x = gamma u onto the normalized model."""
    family.checkExponent(p)

    if beta == 0 or gamma == 0 or sigma == 0:
        raise NoSolitaryWavesError('Dispersion, rotation and nonlinearity coefficients must all be nonzero')

    if np.sign(beta) != np.sign(gamma):
        raise NoSolitaryWavesError(f'beta = {beta} and gamma = {gamma} have opposite signs')

    space = (beta / gamma) ** 0.25
    time = space ** 3 / beta
    ratio = space / (sigma * time)

    if family is ModelFamily.AbsPower:
        amplitude = float(np.sign(ratio)) * abs(ratio) ** (1.0 / (p - 1.0))
        sign = 1
    else:
        amplitude = abs(ratio) ** (1.0 / (p - 1.0))
        sign = int(np.sign(ratio))

    return CoefficientScaling(float(time), float(space), float(amplitude), sign)
