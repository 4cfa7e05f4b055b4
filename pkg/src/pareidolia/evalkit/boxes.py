from dataclasses import dataclass

from .._errors import ParameterError


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ParameterError(f"degenerate box {self!r}")

    @property
    def area(self):
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self):
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def iou(a, b):
    """Intersection over union; 0 for disjoint boxes."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)
