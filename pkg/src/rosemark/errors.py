"""Exception types shared across the toolkit."""


class RosemarkError(Exception):
    """Base class for all toolkit errors."""


class SourceSyntaxError(RosemarkError):
    """Input text is not syntactically valid."""

    def __init__(self, message, line=0, col=0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnsupportedConstructError(RosemarkError):
    """Input parsed but uses a construct outside the supported subset."""

    def __init__(self, construct, span=(0, 0, 0, 0)):
        super().__init__(f"unsupported construct {construct!r} at {span}")
        self.construct = construct
        self.span = span


class InvalidPlanError(RosemarkError):
    """A transformation plan refers to unknown sites or illegal choices."""

    def __init__(self, reason, site_id=None, name=None):
        detail = reason
        if site_id is not None:
            detail = f"site {site_id}: {reason}"
        elif name is not None:
            detail = f"rename {name!r}: {reason}"
        super().__init__(detail)
        self.reason = reason
        self.site_id = site_id
        self.name = name


class CaptureError(InvalidPlanError):
    """A rename would capture or collide with an existing identifier."""

    def __init__(self, name, reason="rename would capture an existing identifier"):
        super().__init__(reason, name=name)


class CapacityError(RosemarkError):
    """Program exposes too few transformation sites for the message length."""


class ShapeMismatchError(RosemarkError):
    """Tensor operands have incompatible shapes."""


class EmptyCorpusError(RosemarkError):
    """Training requested on an empty corpus."""


class EmptyScoresError(RosemarkError):
    """Classification metrics requested on empty score lists."""


class EmptyInputError(RosemarkError):
    """Aggregate statistic requested on an empty collection."""


class MalformedRecordError(RosemarkError):
    """A dataset line is not a well-formed record."""

    def __init__(self, line_no, reason):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DegenerateVarianceError(RosemarkError):
    """Batch-norm folding requested with a non-positive running variance."""


class OverflowRiskError(RosemarkError):
    """Static circuit bounds exceed the field's safe range."""


class UnsatisfiableWitnessError(RosemarkError):
    """No witness satisfies the circuit constraints for the given inputs."""

    def __init__(self, gate_id, reason=""):
        super().__init__(f"gate {gate_id}: {reason or 'constraint unsatisfied'}")
        self.gate_id = gate_id


class ArityMismatchError(RosemarkError):
    """Circuit composition with incompatible wire counts."""


class NotFittedError(RosemarkError):
    """Estimator used before fit()."""
