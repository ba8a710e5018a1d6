"""Percent arithmetic shared by every report.

Values are carried as :class:`~decimal.Decimal` rounded half-up to two
places; integer tables round half-up again from that carried value.
"""
from decimal import ROUND_HALF_UP, Decimal

TWO_PLACES = Decimal("0.01")


def percent(count: int, total: int) -> Decimal:
    if total <= 0:
        raise ZeroDivisionError("percent of an empty population")
    return (Decimal(100 * count) / Decimal(total)).quantize(TWO_PLACES, rounding=ROUND_HALF_UP)


def as_int(value: Decimal) -> int:
    return int(Decimal(value).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def as_2dp(value: Decimal) -> str:
    return f"{Decimal(value).quantize(TWO_PLACES, rounding=ROUND_HALF_UP)}"
