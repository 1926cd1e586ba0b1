"""Run configuration shared by the ingestion and separation front ends."""

from dataclasses import asdict, dataclass
from typing import Optional

from .errors import DomainError
from .kernels import GREEN_ORDER, SINGLE_LAYER_ORDER
from .multiscale import MIN_CAP_NODES

__all__ = ["RunConfig", "HUBER_C", "parse_grid"]

HUBER_C = 1.345


def parse_grid(text):
    """Parse ``"NxM"`` into ``(n_lat, n_lon)``."""
    try:
        a, b = str(text).lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise DomainError(f"grid must look like NxM, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Parameters of an ingestion and separation run.

    Parameters
    ----------
    J0, Jmax : int
        Coarsest and finest scale of the separation.
    green_order, single_layer_order : int
        Taylor orders of the kernel regularizations (1..3).
    n_lat, n_lon : int
        Size of the equiangular grid that scattered data is averaged to.
    bin_deg : float
        Side length in degrees of the colatitude/longitude cell averaged
        around each grid node.
    huber_c : float
        Huber tuning constant in units of the robust cell scale.
    radial_tol : float, optional
        Tolerance on the mean of the radial component; ``None`` uses the
        default relative tolerance of :func:`~sphsep.multiscale.separate`.
    min_nodes : int
        Minimum number of grid nodes inside every wavelet cap.
    """

    J0: int = 2
    Jmax: int = 9
    green_order: int = GREEN_ORDER
    single_layer_order: int = SINGLE_LAYER_ORDER
    n_lat: int = 180
    n_lon: int = 180
    bin_deg: float = 2.5
    huber_c: float = HUBER_C
    radial_tol: Optional[float] = None
    min_nodes: int = MIN_CAP_NODES

    def __post_init__(self):
        if not 0 <= self.J0 <= self.Jmax:
            raise DomainError(f"need 0 <= J0 <= Jmax, got J0={self.J0}, Jmax={self.Jmax}")
        for name in ("green_order", "single_layer_order"):
            if not 1 <= getattr(self, name) <= 3:
                raise DomainError(f"{name} must be 1, 2 or 3")
        if self.n_lat < 2 or self.n_lon < 4:
            raise DomainError(f"degenerate grid {self.n_lat}x{self.n_lon}")
        if not 0.0 < self.bin_deg <= 180.0:
            raise DomainError(f"bin diameter must lie in (0, 180] degrees, got {self.bin_deg}")
        if not self.huber_c > 0.0:
            raise DomainError("huber constant must be positive")
        if self.radial_tol is not None and not self.radial_tol >= 0.0:
            raise DomainError("radial tolerance must be non-negative")
        if self.min_nodes < 1:
            raise DomainError("min_nodes must be at least 1")

    def to_dict(self):
        return asdict(self)
