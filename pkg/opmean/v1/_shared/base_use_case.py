from typing import Any, Callable, Generic, List, Optional, TypeVar

from opmean.utils.exceptions import OpmeanException, exception_not_found

# Type variables for generics
ModelType = TypeVar('ModelType')  # Domain object
ViewSchemaType = TypeVar('ViewSchemaType')  # Schema for returning an item

class BaseUseCase(Generic[ModelType, ViewSchemaType]):
    """
    Base class for the use cases: a service that owns the domain objects and a
    pair of mapper functions that turn them into report schemas.
    """

    def __init__(
        self,
        service: Any,
        entity_name: str,
        map_to_view: Callable[[ModelType], Optional[ViewSchemaType]],
        map_list_to_view: Callable[[List[ModelType]], List[ViewSchemaType]],
        not_found: Optional[Callable[[str], OpmeanException]] = None,
    ):
        """
        Initialize the base use case with service and mapper functions.

        Args:
            service: Object exposing get_all() and get_by_id(id)
            entity_name: The name of the entity (used in error messages)
            map_to_view: Function to map a single object to a view model
            map_list_to_view: Function to map a list of objects to view models
            not_found: Builds the error raised for an unknown id
        """
        self.service = service
        self.entity_name = entity_name
        self.map_to_view = map_to_view
        self.map_list_to_view = map_list_to_view
        self.not_found = not_found or (lambda id: exception_not_found(f"{self.entity_name} {id}"))

    def get_model(self, id: str) -> ModelType:
        model = self.service.get_by_id(id)
        if model is None:
            raise self.not_found(id)
        return model

    def get_all(self) -> List[ViewSchemaType]:
        return self.map_list_to_view(self.service.get_all())

    def get_by_id(self, id: str) -> Optional[ViewSchemaType]:
        return self.map_to_view(self.get_model(id))
