"""Rule-based compliance auditing of secondary-circuit schematics drawn in DXF."""

from .pipeline import AuditConfig, audit_bytes, audit_document

__version__ = "0.1.0"

__all__ = ["AuditConfig", "audit_bytes", "audit_document", "__version__"]
