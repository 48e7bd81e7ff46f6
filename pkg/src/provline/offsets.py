"""Bidirectional codepoint-offset mapping between a base text and a variant.

The map is a contiguous list of segments derived from the applied edits'
length deltas: unedited segments shift by a constant, edited segments map a
base span onto its replacement span. Base order is preserved in variant
order (monotonicity), and unedited regions map with identical substring
content.
"""

from __future__ import annotations

from dataclasses import dataclass


class OffsetMapError(ValueError):
    """Interval outside the bounds of its coordinate space."""


@dataclass(frozen=True)
class Segment:
    base_start: int
    base_end: int
    var_start: int
    var_end: int
    edited: bool
    event_id: str | None = None


@dataclass(frozen=True)
class OffsetMap:
    segments: tuple[Segment, ...]
    base_len: int
    var_len: int

    @classmethod
    def identity(cls, length: int) -> "OffsetMap":
        seg = Segment(0, length, 0, length, edited=False)
        return cls(segments=(seg,) if length else (), base_len=length, var_len=length)

    def _map(self, start: int, end: int, *, to_variant: bool) -> tuple[int, int]:
        if to_variant:
            space_len = self.base_len
            lo = lambda s: s.base_start
            hi = lambda s: s.base_end
            out_lo = lambda s: s.var_start
            out_hi = lambda s: s.var_end
        else:
            space_len = self.var_len
            lo = lambda s: s.var_start
            hi = lambda s: s.var_end
            out_lo = lambda s: s.base_start
            out_hi = lambda s: s.base_end

        if not (0 <= start <= end <= space_len):
            raise OffsetMapError(f"interval [{start},{end}) out of bounds (length {space_len})")

        if start == end:
            # A zero-width interval at an insert position maps onto the
            # inserted text's span, so an applied insert's base span images
            # exactly to its new_text. Elsewhere it collapses to a point.
            inserted = [
                seg
                for seg in self.segments
                if seg.edited and lo(seg) == hi(seg) == start
            ]
            if inserted:
                return min(out_lo(s) for s in inserted), max(out_hi(s) for s in inserted)
            p = self._map_point(start, to_variant=to_variant)
            return p, p

        # Smallest covering interval of the image: union over segments whose
        # input-side interval properly intersects [start, end). Unedited
        # segments contribute the exactly shifted sub-interval; edited
        # segments contribute their whole output span.
        result_lo: int | None = None
        result_hi: int | None = None
        for seg in self.segments:
            if lo(seg) >= end:
                break  # segments are in input order; nothing further intersects
            if hi(seg) <= start or lo(seg) == hi(seg):
                # Non-intersecting, or zero-width on the input side (an
                # insert strictly inside is covered by contiguity).
                continue
            if seg.edited:
                s_lo, s_hi = out_lo(seg), out_hi(seg)
            else:
                delta = out_lo(seg) - lo(seg)
                s_lo = max(start, lo(seg)) + delta
                s_hi = min(end, hi(seg)) + delta
            result_lo = s_lo if result_lo is None else min(result_lo, s_lo)
            result_hi = s_hi if result_hi is None else max(result_hi, s_hi)
        if result_lo is None:
            # Interval covers only zero-width input segments (e.g. between
            # inserts); collapse to a point.
            p = self._map_point(start, to_variant=to_variant)
            return p, p
        return result_lo, result_hi

    def _map_point(self, pos: int, *, to_variant: bool) -> int:
        lo = (lambda s: s.base_start) if to_variant else (lambda s: s.var_start)
        hi = (lambda s: s.base_end) if to_variant else (lambda s: s.var_end)
        out_lo = (lambda s: s.var_start) if to_variant else (lambda s: s.base_start)
        out_len = self.var_len if to_variant else self.base_len
        for seg in self.segments:
            if lo(seg) <= pos < hi(seg):
                if seg.edited:
                    return out_lo(seg)
                return out_lo(seg) + (pos - lo(seg))
        return out_len

    def to_variant(self, interval: tuple[int, int]) -> tuple[int, int]:
        """Smallest variant interval covering the image of a base interval."""
        return self._map(interval[0], interval[1], to_variant=True)

    def to_base(self, interval: tuple[int, int]) -> tuple[int, int]:
        """Smallest base interval covering the preimage of a variant interval."""
        return self._map(interval[0], interval[1], to_variant=False)


def map_span(offset_map: OffsetMap, interval: tuple[int, int], direction: str) -> tuple[int, int]:
    """Map an interval between coordinate spaces; direction is
    "base_to_variant" or "variant_to_base"."""
    if direction == "base_to_variant":
        return offset_map.to_variant(interval)
    if direction == "variant_to_base":
        return offset_map.to_base(interval)
    raise ValueError(f"unknown direction {direction!r}")
