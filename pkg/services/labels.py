from enum import Enum


class Label(str, Enum):
    """Binary class; positive is the high-quality (quality gate) or cell (validity gate) class"""

    POSITIVE = "positive"
    NEGATIVE = "negative"
