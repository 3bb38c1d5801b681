"""Exception types raised by the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class HypothesisError(ValueError):
    """The exponent or coefficient pattern does not match a result's hypotheses."""


class ShapeError(ValueError):
    """A symbol does not have the shape a criterion or expansion expects."""


class SamplingBudgetError(RuntimeError):
    """Rejection sampling exhausted its budget without producing an instance."""

    def __init__(self, family, seed, budget):
        super().__init__(
            f"family {family!r} with seed {seed}: no admissible draw in {budget} tries"
        )
        self.family = family
        self.seed = seed
        self.budget = budget
