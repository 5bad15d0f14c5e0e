import re
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence, Tuple, List


__all__ = [
    'Column',
    'ColumnType',
    'FloatType',
    'IntegerType',
    'TextType',
    'CsvSchema',
    'FIELD_SCHEMA',
    'PROFILE_SCHEMA',
    'CURVE_SCHEMA',
    'TRACE_SCHEMA',
    'EIGEN_FULL_SCHEMA',
    'EIGEN_SYMMETRIC_SCHEMA',
    'VERIFICATION_SCHEMA',
]


COLUMN_NAME = re.compile(r'^[a-z][a-z0-9_]*$')


class ColumnType(ABC):
    """
    Defines how one CSV cell is written and read back.
    """

    nullable: bool = False

    @abstractmethod
    def convertToString(self, data: Any) -> str:
        """
        Convert a Python value to its cell text. Should be the inverse of convertFromString.

        :param data: the value to write
        :type data: Any
        :return: the cell text
        :rtype: str
        """

    @abstractmethod
    def convertFromString(self, string: str) -> Any:
        """
        Convert cell text back to a Python value. Should be the inverse of convertToString.

        :param string: the cell text
        :type string: str
        :return: the Python value
        :rtype: Any
        """


class FloatType(ColumnType):
    """17 significant digits, enough to reproduce every double exactly."""

    def __init__(self, nullable: bool = False) -> None:
        self.nullable = nullable

    def convertToString(self, data: Any) -> str:
        if data is None:
            if not self.nullable:
                raise ValueError('Missing value in a non-nullable float column')
            return ''

        return '%.17g' % float(data)

    def convertFromString(self, string: str) -> Optional[float]:
        if string == '' and self.nullable:
            return None
        return float(string)


class IntegerType(ColumnType):
    def convertToString(self, data: Any) -> str:
        return str(int(data))

    def convertFromString(self, string: str) -> int:
        return int(string)


class TextType(ColumnType):
    def convertToString(self, data: Any) -> str:
        return str(data)

    def convertFromString(self, string: str) -> str:
        return string


class Column:
    def __init__(self, name: str, type: ColumnType) -> None:
        assert COLUMN_NAME.match(name) is not None, f'{name} is not a valid column name'

        self.name = name
        self.type = type

    def format(self, data: Any) -> str:
        return self.type.convertToString(data)

    def parse(self, string: str) -> Any:
        return self.type.convertFromString(string)

    def __str__(self) -> str:
        return f'"{self.name}" {type(self.type).__name__}'


class CsvSchema:
    """A fixed, ordered header together with the cell codec of every column."""

    def __init__(self, *columns: Column) -> None:
        names = [column.name for column in columns]
        assert len(set(names)) == len(names), f'Duplicate column names in {names}'

        self.columns: Tuple[Column, ...] = columns

    @property
    def header(self) -> List[str]:
        return [column.name for column in self.columns]

    def formatRow(self, row: Sequence[Any]) -> List[str]:
        if len(row) != len(self.columns):
            raise ValueError(f'Expected {len(self.columns)} cells, got {len(row)}')

        return [column.format(value) for column, value in zip(self.columns, row)]

    def parseRow(self, row: Sequence[str]) -> Dict[str, Any]:
        if len(row) != len(self.columns):
            raise ValueError(f'Expected {len(self.columns)} cells, got {len(row)}')

        return {column.name: column.parse(cell) for column, cell in zip(self.columns, row)}

    def checkHeader(self, header: Sequence[str]) -> None:
        if list(header) != self.header:
            raise ValueError(f'Unexpected CSV header {list(header)}, expected {self.header}')


FIELD_SCHEMA = CsvSchema(
    Column('x', FloatType()),
    Column('value', FloatType()),
)

PROFILE_SCHEMA = CsvSchema(
    Column('x', FloatType()),
    Column('phi', FloatType()),
    Column('dphi', FloatType()),
    Column('antideriv', FloatType()),
)

CURVE_SCHEMA = CsvSchema(
    Column('lambda', FloatType()),
    Column('m_value', FloatType()),
    Column('omega', FloatType()),
    Column('el_residual', FloatType()),
)

TRACE_SCHEMA = CsvSchema(
    Column('t', FloatType()),
    Column('mass', FloatType()),
    Column('energy', FloatType()),
    Column('orbital_distance', FloatType(nullable=True)),
)

EIGEN_FULL_SCHEMA = CsvSchema(
    Column('re', FloatType()),
    Column('im', FloatType()),
)

EIGEN_SYMMETRIC_SCHEMA = CsvSchema(
    Column('value', FloatType()),
)

VERIFICATION_SCHEMA = CsvSchema(
    Column('family', TextType()),
    Column('p', FloatType()),
    Column('lambda', FloatType()),
    Column('omega', FloatType()),
    Column('m_value', FloatType()),
    Column('el_residual_2', FloatType()),
    Column('el_residual_4', FloatType()),
    Column('pohozaev_r1', FloatType()),
    Column('pohozaev_r2', FloatType()),
    Column('pohozaev_r1_fourth', FloatType()),
    Column('pohozaev_r2_fourth', FloatType()),
    Column('kappa_ratio', FloatType()),
    Column('n_minus', IntegerType()),
    Column('kernel_overlap', FloatType()),
    Column('vk_value', FloatType(nullable=True)),
    Column('max_real_full', FloatType()),
    Column('verdict', TextType()),
    Column('evolve_ratio', FloatType(nullable=True)),
)
