"""Learning-rate schedules, evaluated on 0-based epoch indices."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Constant:
    eta0: float

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError(f"eta0 must be positive, got {self.eta0}")

    def eta_at(self, epoch: int) -> float:
        return self.eta0


@dataclass(frozen=True)
class StepDecay:
    """eta0 * factor ** (epoch // every)."""

    eta0: float
    factor: float = 0.5
    every: int = 2

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError(f"eta0 must be positive, got {self.eta0}")
        if not 0.0 < self.factor <= 1.0:
            raise ValueError(f"factor must be in (0, 1], got {self.factor}")
        if self.every < 1:
            raise ValueError(f"every must be >= 1, got {self.every}")

    def eta_at(self, epoch: int) -> float:
        return self.eta0 * self.factor ** (epoch // self.every)


@dataclass(frozen=True)
class InverseDecay:
    """eta0 / (1 + k * epoch)."""

    eta0: float
    k: float = 0.1

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError(f"eta0 must be positive, got {self.eta0}")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")

    def eta_at(self, epoch: int) -> float:
        return self.eta0 / (1.0 + self.k * epoch)


LrSchedule = Constant | StepDecay | InverseDecay
