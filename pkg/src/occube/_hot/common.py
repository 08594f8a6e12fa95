"""Flat input layout shared by the pure and compiled materialization kernels."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class AttrDimPrep:
    """Attribute dimension compiled to integer ids.

    ``value_ids[e]`` is the event's value id in the dimension's sorted
    domain (-1 when the event does not define the attribute); ``allowed``
    marks value ids inside the union of the dimension's selection;
    ``member_lists[vid]`` lists the selected member indices whose set
    contains the value (selected dimensions only, else None).
    """

    slot: int
    value_ids: list[int]
    allowed: list[bool]
    member_lists: list[list[int]] | None


@dataclass
class OtDimPrep:
    """Object-type dimension compiled to integer ids.

    ``obj_lists[e]`` holds the event's object ids for this type, sorted;
    ``allowed`` marks ids inside the union of the selection. For selected
    dimensions exactly one of ``obj_to_member`` (all members are singletons:
    object id -> member index or -1) or ``member_ids`` (general members as
    sorted id lists) is set.
    """

    slot: int
    obj_lists: list[list[int]]
    allowed: list[bool]
    obj_to_member: list[int] | None
    member_ids: list[list[int]] | None


@dataclass
class MaterializePrep:
    """Everything a kernel needs: per-dimension tables plus cell radices.

    ``radices[i]`` is the selection size of the i-th selected dimension
    (dimensions in sorted-name order); a cell coordinate holds one member
    index per selected dimension in that order.
    """

    n_events: int
    radices: list[int]
    attr_dims: list[AttrDimPrep]
    ot_dims: list[OtDimPrep]
