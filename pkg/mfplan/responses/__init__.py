from mfplan.responses.response import Response, CertificateResponse

__all__ = ('Response', 'CertificateResponse')
