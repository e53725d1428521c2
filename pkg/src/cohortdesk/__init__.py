"""cohortdesk: desk-scale self-service clinical cohort discovery, chart
review, and compliance-gated data download over a square-table data model."""

__version__ = "0.1.0"
