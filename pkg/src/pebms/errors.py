"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside a space's point set or interval domain."""


class ConfigurationError(ValueError):
    """A profile or operation was asked to use data the space does not carry."""


class ExpressionError(ValueError):
    """A closed-form expression failed to parse, validate, or evaluate."""


class InfeasibleThetaError(ValueError):
    """No control value can repair the triangle axiom at some triple.

    Raised by ``minimal_theta`` when a triple has a zero relaxation bracket
    but a positive left side.  The offending triple is stored on ``triple``.
    """

    def __init__(self, triple, message=None):
        self.triple = tuple(int(i) for i in triple)
        super().__init__(
            message or f"no finite control value satisfies the triangle axiom at triple {self.triple}"
        )


class MutationImpossibleError(RuntimeError):
    """The control matrix has no entry that can be lowered into a violation."""


class UnknownExampleError(KeyError):
    """A gallery lookup used an id that does not exist."""

    def __init__(self, example_id, known_ids):
        self.example_id = example_id
        self.known_ids = tuple(known_ids)
        super().__init__(f"unknown example id {example_id!r}; known ids: {', '.join(self.known_ids)}")
