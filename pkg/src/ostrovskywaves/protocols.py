from typing import Any, Dict

from typing_extensions import Protocol, runtime_checkable


__all__ = [
    'JsonRepresentable',
]


@runtime_checkable
class JsonRepresentable(Protocol):
    def toJson(self) -> Dict[str, Any]:
        """
        Build a JSON-compatible summary of this object.

        :return: a dictionary holding only JSON-compatible values (str, int, float, bool, None, lists and dicts)
        :rtype: Dict[str, Any]
        """
