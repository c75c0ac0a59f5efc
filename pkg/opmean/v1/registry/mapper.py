from typing import Any, Dict, List, Optional

from opmean.v1._shared.base_chain import BaseChain
from opmean.v1._shared.base_mapper import BaseMapper
from opmean.v1._shared.custom_schemas import CaseSummary, ChainListing
from opmean.v1._shared.schemas import ChainReport

class ChainListingMapper(BaseMapper[BaseChain, ChainListing]):
    """Maps a registry chain to the row printed by `opmean chains`."""

    def __init__(self):
        super().__init__(view_class=ChainListing, entity_name="Chain")

    def _extract_model_data(self, model: BaseChain, **context: Any) -> Dict[str, Any]:
        return {
            "id": model.id,
            "params": model.param_names,
            "takes_function": model.takes_function,
            "anchor": model.anchor,
            "segments": model.segments,
        }


class CaseSummaryMapper(BaseMapper[ChainReport, CaseSummary]):
    """Maps a ChainReport to its report summary {id, params, dims, margins, holds, tolerance}."""

    def __init__(self):
        super().__init__(view_class=CaseSummary, entity_name="ChainReport")

    def _extract_model_data(self, model: ChainReport, **context: Any) -> Dict[str, Any]:
        descriptor = model.descriptor
        return {
            "index": context.get("index", 0),
            "trial": context.get("trial", 0),
            "id": descriptor.id,
            "f": descriptor.f,
            "params": dict(descriptor.params),
            "dims": model.dims if descriptor.takes_operands else 0,
            "margins": list(model.margins),
            "gaps": list(model.gaps),
            "holds": model.holds,
            "tolerance": model.tolerance,
        }


# Create singleton instances
chain_listing_mapper = ChainListingMapper()
case_summary_mapper = CaseSummaryMapper()

def map_to_chain_listing(chain: BaseChain) -> Optional[ChainListing]:
    """Map a registry chain to a ChainListing."""
    return chain_listing_mapper.map_to_view(chain)

def map_list_to_chain_listing(chains: List[BaseChain]) -> List[ChainListing]:
    """Map a list of registry chains to ChainListings."""
    return chain_listing_mapper.map_list_to_view(chains)

def map_to_case_summary(report: ChainReport, index: int = 0, trial: int = 0) -> Optional[CaseSummary]:
    """Map a ChainReport to a CaseSummary."""
    return case_summary_mapper.map_to_view(report, index=index, trial=trial)
