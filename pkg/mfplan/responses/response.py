from __future__ import annotations

from typing import Any, Literal, Optional


class Response:
    """Outcome of a CLI command. Handlers return one of these instead of raising."""

    __slots__ = (
        'status',
        'value',
        'mode',
    )

    @classmethod
    def error(cls, value: Any) -> Response:
        return cls('error', value)

    @classmethod
    def success(cls, value: Optional[Any] = None) -> Response:
        return cls('success', value)

    @classmethod
    def from_exception(cls, error: Exception) -> Response:
        return cls('error', {'error': type(error).__name__, 'message': str(error)})

    def __init__(
        self, status: Literal['error', 'success'], value: Any, mode: Literal['data', 'certificate'] = 'data'
    ) -> None:
        self.status: Literal['error', 'success'] = status
        self.value = value
        self.mode: Literal['data', 'certificate'] = mode

    @property
    def is_error(self) -> bool:
        return self.status == 'error'

    @property
    def exit_code(self) -> int:
        # input and numerical errors
        return 2 if self.is_error else 0

    def payload(self) -> dict[str, Any]:
        """The machine-readable object printed on stdout."""
        if not self.is_error:
            return {'status': 'success', 'value': self.value}
        if isinstance(self.value, dict) and 'error' in self.value:
            return {'status': 'error', **self.value}
        return {'status': 'error', 'error': 'Error', 'message': str(self.value)}


class CertificateResponse(Response):
    """A finished command whose certificates may still have failed.

    `value` is the report dict; `failed` lists the names of the thresholds that were exceeded.
    """

    __slots__ = ('failed',)

    def __init__(self, value: Any, failed: Optional[list[str]] = None) -> None:
        self.failed: list[str] = failed or []
        super().__init__('error' if self.failed else 'success', value, 'certificate')

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def payload(self) -> dict[str, Any]:
        if not self.failed:
            return super().payload()
        return {
            'status': 'error',
            'error': 'CertificateFailure',
            'message': f'Certificates failed: {", ".join(self.failed)}.',
            'value': self.value,
        }
