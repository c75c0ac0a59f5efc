import logging
from typing import Dict, List, Optional, Union

from opmean.utils.exceptions import ExceptionChainNotFound
from opmean.v1._shared.base_chain import BaseChain
from opmean.v1._shared.base_use_case import BaseUseCase
from opmean.v1._shared.custom_schemas import ChainListing
from opmean.v1._shared.schemas import ChainDescriptor, ChainReport, QuadratureSpec, TestFunction
from opmean.v1.hermat.service import MatrixLike
from opmean.v1.registry.chains import registry
from opmean.v1.registry.mapper import map_list_to_chain_listing, map_to_chain_listing

logger = logging.getLogger(__name__)

class RegistryUseCase(BaseUseCase[BaseChain, ChainListing]):
    """
    Use case for the chain registry.

    Lists the chains and evaluates one of them on a pair of operands.
    """

    def __init__(self):
        """Initialize the RegistryUseCase with the chain registry and its mappers."""
        super().__init__(
            service=registry,
            entity_name="Chain",
            map_to_view=map_to_chain_listing,
            map_list_to_view=map_list_to_chain_listing,
            not_found=ExceptionChainNotFound,
        )

    def list_chains(self) -> List[ChainDescriptor]:
        return [chain.descriptor() for chain in self.service.get_all()]

    def evaluate_chain(
        self,
        chain_id: str,
        A: Optional[MatrixLike],
        B: Optional[MatrixLike],
        params: Optional[Dict[str, float]] = None,
        f: Union[TestFunction, str, None] = None,
        tol: Optional[float] = None,
        spec: Optional[QuadratureSpec] = None,
    ) -> ChainReport:
        chain = self.get_model(chain_id)
        logger.debug(f"Evaluating {chain_id} with params={params}, f={getattr(f, 'id', f)}")
        return chain.evaluate(A, B, params=params, f=f, tol=tol, spec=spec)


registry_use_case = RegistryUseCase()

def list_chains() -> List[ChainDescriptor]:
    """Every chain of the registry, in registry order."""
    return registry_use_case.list_chains()

def get_chain(chain_id: str) -> BaseChain:
    return registry_use_case.get_model(chain_id)

def evaluate_chain(
    chain_id: str,
    A: Optional[MatrixLike],
    B: Optional[MatrixLike],
    params: Optional[Dict[str, float]] = None,
    f: Union[TestFunction, str, None] = None,
    tol: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
) -> ChainReport:
    """Evaluate a registry chain; unknown ids raise ExceptionChainNotFound."""
    return registry_use_case.evaluate_chain(chain_id, A, B, params=params, f=f, tol=tol, spec=spec)
