"""Authenticated service endpoints, tokens, audit journal, charts, downloads."""

from .app import AccessDenied, AuthError, Gateway, GatewayError, NotFound, RequestError
from .audit import AuditLog, AuditRecord, AuditTamperError
from .charts import CHART_SECTIONS, ChartDocument, build_chart
from .config import GatewayConfig, load_config
from .downloads import DownloadError, download_dataset, recruitment_report
from .httpd import make_server, serve_in_thread
from .tokens import ApiToken, TokenError, Verdict, issue_token, verify_token

__all__ = [
    "AccessDenied",
    "ApiToken",
    "AuditLog",
    "AuditRecord",
    "AuditTamperError",
    "AuthError",
    "CHART_SECTIONS",
    "ChartDocument",
    "DownloadError",
    "Gateway",
    "GatewayConfig",
    "GatewayError",
    "NotFound",
    "RequestError",
    "TokenError",
    "Verdict",
    "build_chart",
    "download_dataset",
    "issue_token",
    "load_config",
    "make_server",
    "recruitment_report",
    "serve_in_thread",
    "verify_token",
]
