import re
from dataclasses import dataclass
from typing import Optional

from .exceptions import IncompatibleArtifactError


__all__ = [
    'Version',
    'PRODUCER_NAME',
    'CURRENT_VERSION',
]


PRODUCER_NAME = 'ostrovskywaves'

VERSION_REGEX = re.compile(r'^(\d+)\.(\d+)\.(\d+)(?:-([A-Za-z0-9.]+))?$')


@dataclass(frozen=True, order=True)
class Version:
    major: int
    minor: int
    patch: int

    tag: Optional[str] = None

    def __post_init__(self) -> None:
        if self.major < 0 or self.minor < 0 or self.patch < 0:
            raise ValueError(f'Illegal Version Number ({self.major}.{self.minor}.{self.patch})')

        if self.tag == '':
            raise ValueError(f'Illegal Tag Value ({self.tag})')

    def __str__(self) -> str:
        if self.tag is None:
            return f'{self.major}.{self.minor}.{self.patch}'
        return f'{self.major}.{self.minor}.{self.patch}-{self.tag}'

    @property
    def producer(self) -> str:
        """The string stamped into every JSON artifact."""
        return f'{PRODUCER_NAME} {self}'

    @classmethod
    def fromString(cls, string: str) -> 'Version':
        match = VERSION_REGEX.match(string.strip())

        if match is None:
            raise ValueError(f'Illegal Version String ({string})')

        return cls(int(match.group(1)), int(match.group(2)), int(match.group(3)), match.group(4))

    @classmethod
    def fromProducer(cls, producer: str) -> 'Version':
        name, _, number = producer.partition(' ')

        if name != PRODUCER_NAME:
            raise IncompatibleArtifactError(f'Artifact was produced by {name!r}, not {PRODUCER_NAME}')

        return cls.fromString(number)

    def checkCompatible(self, other: 'Version') -> None:
        if self.major != other.major:
            raise IncompatibleArtifactError(f'Artifact version {other} is incompatible with {self}')


CURRENT_VERSION = Version(1, 0, 0)
