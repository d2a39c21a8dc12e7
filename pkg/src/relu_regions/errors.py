"""Exception types shared across the package."""


class InvalidArchitectureError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class BoundaryPointError(ValueError):
    """A pre-activation sits on its threshold, so the point has no pattern."""

    def __init__(self, message, neuron=None):
        super().__init__(message)
        self.neuron = neuron


class InvalidScaleError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class DegenerateSliceError(ValueError):
    pass


class DegenerateNeuronError(RuntimeError):
    """A neuron's functional vanishes identically on a cell."""

    def __init__(self, message, neuron=None, cell_index=None):
        super().__init__(message)
        self.neuron = neuron
        self.cell_index = cell_index


class BudgetExceededError(RuntimeError):
    """Cell count passed the configured cap; ``partial`` holds the census so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DivergenceError(FloatingPointError):
    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class IdxFormatError(ValueError):
    pass


class IdxConsistencyError(ValueError):
    pass
