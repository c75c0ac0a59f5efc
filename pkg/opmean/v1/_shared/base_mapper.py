from enum import Enum
from typing import Any, Dict, Generic, List, Optional, Type, TypeVar

# Type variables for generics
ModelType = TypeVar('ModelType')  # Domain object (chain, report, ...)
ViewSchemaType = TypeVar('ViewSchemaType')  # Schema written to reports

class BaseMapper(Generic[ModelType, ViewSchemaType]):
    """
    Base class for the mappers that turn domain objects into report schemas.

    Subclasses implement `_extract_model_data`; enum values are flattened to
    their string value on the way out.
    """

    def __init__(self, view_class: Type[ViewSchemaType], entity_name: str):
        """
        Args:
            view_class: The pydantic view model class
            entity_name: The name of the entity (used in log and error messages)
        """
        self.view_class = view_class
        self.entity_name = entity_name

    def _handle_enum_value(self, value: Any) -> Any:
        """Convert enum values to their string representation."""
        if isinstance(value, Enum):
            return value.value
        return value

    def _extract_model_data(self, model: ModelType, **context: Any) -> Dict[str, Any]:
        raise NotImplementedError

    def map_to_view(self, model: Optional[ModelType], **context: Any) -> Optional[ViewSchemaType]:
        if model is None:
            return None
        data = {key: self._handle_enum_value(value) for key, value in self._extract_model_data(model, **context).items()}
        return self.view_class(**data)

    def map_list_to_view(self, models: List[ModelType], **context: Any) -> List[ViewSchemaType]:
        return [view for view in (self.map_to_view(model, **context) for model in models) if view is not None]
