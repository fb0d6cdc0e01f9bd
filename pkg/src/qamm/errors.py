"""Exception types shared across the pipeline.

Every error raised on a data or configuration problem derives from
QammError so callers can catch one base class at the CLI boundary.
"""


class QammError(Exception):
    """Base class for all package errors."""


class MalformedRow(QammError):
    """A CSV row failed to parse; carries the row index and reason."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"row {index}: {reason}")


class InvariantViolation(QammError):
    """A candle violated an OHLCV invariant; names the row index."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"row {index}: {reason}")


class NonMonotonicTime(QammError):
    """Timestamps decreased or repeated."""


class IrregularSpacing(QammError):
    """Bar spacing is not uniform and no fill policy was configured."""


class InsufficientHistory(QammError):
    """Series too short for the requested lookback."""


class UnknownFeature(QammError):
    """A feature name is not in the schema."""


class UnknownLabelRule(QammError):
    """A labeling task name is not registered."""


class DegenerateLabels(QammError):
    """A label split left one class with too few training examples."""


class QubitCountExceeded(QammError):
    """Requested circuit width above the simulator cap."""


class BadAmplitudeDim(QammError):
    """Amplitude encoding input cannot fill a power-of-two register."""


class ZeroVector(QammError):
    """Amplitude encoding requires a nonzero input vector."""


class DegenerateBounds(QammError):
    """Angle encoding saw a feature with equal train min and max."""


class SingleClassTraining(QammError):
    """Model fit called with only one label class present."""


class NonPsdKernel(QammError):
    """Gram matrix has an eigenvalue below the -1e-8 tolerance."""


class NotFitted(QammError):
    """Predict called before fit."""


class GradientCheckFailure(QammError):
    """First-batch finite difference audit disagreed with the analytic gradient."""


class NonFiniteActivation(QammError):
    """A forward pass produced NaN or infinity."""


class EmptyWindow(QammError):
    """Backtest asked to simulate an empty price window."""


class MisalignedSignals(QammError):
    """Signal vector length differs from the test-slice length."""


class DegenerateCurve(QammError):
    """Equity curve too short to compute returns."""


class TooFewRuns(QammError):
    """Run aggregation needs at least two reports."""


class ZeroVariancePair(QammError):
    """Welch test on two constant samples with different means."""


class ConfigError(QammError):
    """Experiment configuration failed validation."""


class RunError(QammError):
    """One (model, asset, run) failed; wraps the original error."""

    def __init__(self, model_id: str, asset: str, run_index: int, cause: Exception):
        self.model_id = model_id
        self.asset = asset
        self.run_index = run_index
        self.cause = cause
        super().__init__(f"{model_id}/{asset}/run{run_index}: {cause}")
