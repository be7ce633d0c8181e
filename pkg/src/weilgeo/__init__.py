"""weilgeo: nilpotent-infinitesimal arithmetic and synthetic curvature.

Layers:

* :mod:`weilgeo.weil` - truncated polynomial rings modulo monomial
  nilpotency ideals (spec constructors, elements, extraction, exact
  Taylor evaluation);
* :mod:`weilgeo.manifold` - catalog charts and the classical curvature
  oracle;
* :mod:`weilgeo.sdg` - tangent jets, connections, infinitesimal parallel
  transport, loop holonomy and curvature extraction;
* :mod:`weilgeo.hybrid` - the regime-switching shrinking-universe
  simulator;
* :mod:`weilgeo.service` / :mod:`weilgeo.cli` - FastAPI service and the
  thin CLI client.
"""

__version__ = "0.1.0"

from .weil import (  # noqa: F401
    DEFAULT_TOLERANCE,
    DInfTrunc,
    Dk,
    DkOfN,
    DOfN,
    InfinitesimalSpec,
    PowerDk,
    ProductDk,
    WeilElement,
    augmentation,
    generator,
    generators,
    is_infinitesimal,
    kl_extract,
    nilpotency_order,
    spec_contains,
    taylor_eval,
    tensor,
)
