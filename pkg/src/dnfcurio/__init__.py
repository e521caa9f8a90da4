"""Dynamic neural field curiosity architecture driving a simulated tabletop pusher."""
from .kernels import BACKEND_NAME

__version__ = "0.1.0"
__all__ = ["BACKEND_NAME", "__version__"]
