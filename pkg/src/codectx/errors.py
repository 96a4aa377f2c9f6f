"""Exception hierarchy shared across the pipeline."""


class CodectxError(Exception):
    """Base class for all errors raised by this package."""


class MiniSyntaxError(CodectxError):
    """Unparseable source text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class FormatError(CodectxError):
    """Malformed record or file; names the first offending field."""


class LabelRangeError(CodectxError):
    """Class label outside the declared range."""


class DanglingIdError(CodectxError):
    """Clone pair references ids absent from the code store."""

    def __init__(self, ids):
        super().__init__(f"unresolved ids: {sorted(ids)}")
        self.ids = sorted(ids)


class ShapeError(CodectxError):
    """Tensor shapes do not conform."""


class EmptyInputError(CodectxError):
    """Operation requires a nonempty input."""


class EmptyCorpusError(CodectxError):
    """Corpus-level operation requires at least one document."""


class DegenerateLabelsError(CodectxError):
    """Training requires at least two distinct labels."""


class NotAClassError(CodectxError):
    """Feature extraction requires a class declaration."""


class UnknownLabelError(CodectxError):
    """Label outside the configured closed set."""


class MissingChannelError(CodectxError):
    """Ablation variant requires a context channel that was not provided."""


class UnsupportedTypeError(CodectxError):
    """Unknown clone type requested from the generator."""


class VersionError(CodectxError):
    """Persisted bundle carries an unsupported format version."""
