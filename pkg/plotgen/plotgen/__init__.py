"""Figure generation from the cross-medium simulator's CSV outputs."""

from .render import (
    render,
    render_comparison,
    render_ct_curve,
    render_error_hist,
    render_tracking,
)
from .schemas import SchemaError

__all__ = [
    "SchemaError",
    "render",
    "render_comparison",
    "render_ct_curve",
    "render_error_hist",
    "render_tracking",
]
__version__ = "0.1.0"
