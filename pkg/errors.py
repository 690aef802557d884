from typing import Dict


class QJuntaError(Exception):
    """
    Base error. `detail` is the human-readable message that ends up in the
    CLI's machine-readable error object.
    """

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def to_payload(self) -> Dict[str, str]:
        return {"type": type(self).__name__, "detail": self.detail}


class DimensionMismatchError(QJuntaError, ValueError):
    pass


class QubitIndexError(QJuntaError, IndexError):
    pass


class SizeLimitError(QJuntaError, ValueError):
    pass


class NotUnitaryError(QJuntaError, ValueError):
    pass


class InvalidParameterError(QJuntaError, ValueError):
    pass


class InstanceFormatError(QJuntaError, ValueError):
    pass


class InsufficientCopiesError(QJuntaError, RuntimeError):
    def __init__(self, needed: int, obtained: int):
        super().__init__(f"Needed {needed} copies of the post-measurement state, obtained {obtained}.")
        self.needed = needed
        self.obtained = obtained


class PromiseViolationError(QJuntaError, RuntimeError):
    """Pauli sampling found more relevant qubits than the junta size allows."""

    def __init__(self, sampled: int, k: int):
        super().__init__(f"Sampled {sampled} relevant qubits, more than k={k}: not a {k}-junta.")
        self.sampled = sampled
        self.k = k
