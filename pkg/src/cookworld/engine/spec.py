"""Immutable game definitions and their JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from ..kg import DIRECTIONS, OPPOSITE_DIRECTION

FORMAT_VERSION = 1

LEVELS = ("S1", "S2", "S3", "S4", "US1", "US2", "US3", "US4")
SEEN_LEVELS = ("S1", "S2", "S3", "S4")
UNSEEN_LEVELS = ("US1", "US2", "US3", "US4")

CUT_STATES = ("none", "uncut", "chopped", "diced", "sliced")
COOK_STATES = ("none", "raw", "fried", "roasted", "burned")
CUT_REQUIREMENTS = ("chopped", "diced", "sliced")
COOK_REQUIREMENTS = ("fried", "roasted")

OBJECT_KINDS = ("ingredient", "distractor", "tool", "furniture", "appliance", "cookbook")

# Interaction capabilities are keyed by object name so that hand-authored and
# generated specs agree on semantics without per-object capability fields.
SUPPORTER_NAMES = frozenset(
    {"counter", "table", "stove", "shelf", "workbench", "desk", "nightstand", "dresser"}
)
CONTAINER_NAMES = frozenset({"fridge", "kitchen cupboard", "toolbox", "trunk"})
APPLIANCE_RESULT = {"stove": "fried", "oven": "roasted"}

# (rooms, ingredients, requirements per ingredient) per difficulty level.
LEVEL_STRUCTURE = {
    "S1": (1, 1, 1),
    "S2": (1, 1, 2),
    "S3": (9, 1, 0),
    "S4": (6, 3, 2),
    "US1": (1, 1, 0),
    "US2": (1, 1, 1),
    "US3": (6, 1, 0),
    "US4": (6, 3, 0),
}


class SpecParseError(ValueError):
    """The document is not a well-formed game-spec file."""


class InvariantViolation(ValueError):
    """A structurally valid document violates a game-spec invariant."""

    def __init__(self, invariant: str, detail: str):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}")


@dataclass(frozen=True)
class Exit:
    direction: str
    to: str
    door: Optional[str] = None


@dataclass(frozen=True)
class RoomSpec:
    name: str
    exits: tuple[Exit, ...] = ()

    def exit_in(self, direction: str) -> Optional[Exit]:
        for ex in self.exits:
            if ex.direction == direction:
                return ex
        return None


@dataclass(frozen=True)
class DoorSpec:
    name: str
    room_a: str
    direction_from_a: str  # going this way from room_a passes through the door
    room_b: str
    open: bool = False


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    kind: str
    holder: str  # room, furniture, or "player"
    holder_relation: str  # at | in | on
    cut_state: str = "none"
    cook_state: str = "none"
    edible: bool = False

    @property
    def portable(self) -> bool:
        return self.kind in ("ingredient", "distractor", "tool", "cookbook")

    @property
    def is_food(self) -> bool:
        return self.kind == "ingredient"


@dataclass(frozen=True)
class RecipeEntry:
    ingredient: str
    cut: str = "none"
    cook: str = "none"

    @property
    def requirements(self) -> tuple[str, ...]:
        reqs = []
        if self.cut != "none":
            reqs.append(self.cut)
        if self.cook != "none":
            reqs.append(self.cook)
        return tuple(reqs)


@dataclass(frozen=True)
class GameSpec:
    level: str
    seed: int
    start_room: str
    rooms: tuple[RoomSpec, ...]
    doors: tuple[DoorSpec, ...]
    objects: tuple[ObjectSpec, ...]
    recipe: tuple[RecipeEntry, ...]
    max_score: int
    format_version: int = FORMAT_VERSION

    def room(self, name: str) -> RoomSpec:
        for room in self.rooms:
            if room.name == name:
                return room
        raise KeyError(name)

    def door(self, name: str) -> DoorSpec:
        for door in self.doors:
            if door.name == name:
                return door
        raise KeyError(name)

    def object(self, name: str) -> ObjectSpec:
        for obj in self.objects:
            if obj.name == name:
                return obj
        raise KeyError(name)

    @property
    def room_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.rooms)

    @property
    def recipe_ingredients(self) -> tuple[str, ...]:
        return tuple(entry.ingredient for entry in self.recipe)

    def recipe_entry(self, ingredient: str) -> RecipeEntry:
        for entry in self.recipe:
            if entry.ingredient == ingredient:
                return entry
        raise KeyError(ingredient)


def expected_max_score(recipe: Sequence[RecipeEntry]) -> int:
    """collection points + preparation points + (prepare meal, eat meal)."""
    return len(recipe) + sum(len(e.requirements) for e in recipe) + 2


def validate_spec(spec: GameSpec) -> None:
    rooms = {r.name: r for r in spec.rooms}
    doors = {d.name: d for d in spec.doors}
    objects = {o.name: o for o in spec.objects}

    if len(rooms) != len(spec.rooms):
        raise InvariantViolation("unique-room-names", "duplicate room name")
    if len(objects) != len(spec.objects):
        raise InvariantViolation("unique-object-names", "duplicate object name")
    if spec.start_room not in rooms:
        raise InvariantViolation("start-room-exists", spec.start_room)
    if spec.level not in LEVEL_STRUCTURE:
        raise InvariantViolation("known-level", spec.level)

    for room in spec.rooms:
        seen_dirs = set()
        for ex in room.exits:
            if ex.direction not in DIRECTIONS:
                raise InvariantViolation("exit-direction", f"{room.name}: {ex.direction}")
            if ex.direction in seen_dirs:
                raise InvariantViolation("one-exit-per-direction", f"{room.name}: {ex.direction}")
            seen_dirs.add(ex.direction)
            if ex.to not in rooms:
                raise InvariantViolation("exit-target-exists", f"{room.name} -> {ex.to}")
            back = rooms[ex.to].exit_in(OPPOSITE_DIRECTION[ex.direction])
            if back is None or back.to != room.name or back.door != ex.door:
                raise InvariantViolation(
                    "adjacency-symmetric", f"{room.name} {ex.direction} {ex.to}"
                )
            if ex.door is not None and ex.door not in doors:
                raise InvariantViolation("door-exists", f"{room.name}: {ex.door}")

    for door in spec.doors:
        ex = rooms[door.room_a].exit_in(door.direction_from_a) if door.room_a in rooms else None
        if door.room_a not in rooms or door.room_b not in rooms:
            raise InvariantViolation("door-rooms-exist", door.name)
        if ex is None or ex.to != door.room_b or ex.door != door.name:
            raise InvariantViolation("door-placement", door.name)

    # connectivity over the undirected room graph (doors count as passable)
    frontier = [spec.rooms[0].name]
    reached = {spec.rooms[0].name}
    while frontier:
        here = frontier.pop()
        for ex in rooms[here].exits:
            if ex.to not in reached:
                reached.add(ex.to)
                frontier.append(ex.to)
    if reached != set(rooms):
        missing = sorted(set(rooms) - reached)
        raise InvariantViolation("rooms-connected", f"unreachable: {missing}")

    holders = set(rooms) | set(objects) | {"player"}
    for obj in spec.objects:
        if obj.kind not in OBJECT_KINDS:
            raise InvariantViolation("object-kind", f"{obj.name}: {obj.kind}")
        if obj.cut_state not in CUT_STATES or obj.cook_state not in COOK_STATES:
            raise InvariantViolation("object-state", obj.name)
        if obj.holder not in holders:
            raise InvariantViolation("holder-exists", f"{obj.name} in {obj.holder}")
        if obj.holder_relation not in ("at", "in", "on"):
            raise InvariantViolation("holder-relation", obj.name)
        if obj.holder in objects:
            holder_obj = objects[obj.holder]
            if obj.holder_relation == "on" and holder_obj.name not in SUPPORTER_NAMES:
                raise InvariantViolation("holder-supports", f"{obj.name} on {obj.holder}")
            if obj.holder_relation == "in" and holder_obj.name not in CONTAINER_NAMES:
                raise InvariantViolation("holder-contains", f"{obj.name} in {obj.holder}")
        if obj.holder in rooms and obj.holder_relation != "at":
            raise InvariantViolation("room-holder-relation", obj.name)

    if "knife" not in objects or objects["knife"].kind != "tool":
        raise InvariantViolation("knife-exists", "no knife tool")
    if "cookbook" not in objects or objects["cookbook"].kind != "cookbook":
        raise InvariantViolation("cookbook-exists", "no cookbook")
    if "kitchen" not in rooms:
        raise InvariantViolation("kitchen-exists", "no kitchen room")

    seen_ingredients = set()
    for entry in spec.recipe:
        if entry.ingredient in seen_ingredients:
            raise InvariantViolation("recipe-distinct", entry.ingredient)
        seen_ingredients.add(entry.ingredient)
        if entry.ingredient not in objects or objects[entry.ingredient].kind != "ingredient":
            raise InvariantViolation("recipe-ingredient-exists", entry.ingredient)
        if entry.cut != "none" and entry.cut not in CUT_REQUIREMENTS:
            raise InvariantViolation("recipe-cut-state", f"{entry.ingredient}: {entry.cut}")
        if entry.cook != "none" and entry.cook not in COOK_REQUIREMENTS:
            raise InvariantViolation("recipe-cook-state", f"{entry.ingredient}: {entry.cook}")

    if spec.max_score != expected_max_score(spec.recipe):
        raise InvariantViolation(
            "max-score-formula",
            f"stored {spec.max_score}, computed {expected_max_score(spec.recipe)}",
        )

    n_rooms, n_ings, reqs_per_ing = LEVEL_STRUCTURE[spec.level]
    if len(spec.rooms) != n_rooms:
        raise InvariantViolation("level-room-count", f"{spec.level}: {len(spec.rooms)}")
    if len(spec.recipe) != n_ings:
        raise InvariantViolation("level-ingredient-count", f"{spec.level}: {len(spec.recipe)}")
    for entry in spec.recipe:
        if len(entry.requirements) != reqs_per_ing:
            raise InvariantViolation(
                "level-requirement-count", f"{spec.level}: {entry.ingredient}"
            )


# ---------------------------------------------------------------------------
# serialization

def spec_to_dict(spec: GameSpec) -> dict:
    return {
        "format_version": spec.format_version,
        "level": spec.level,
        "seed": spec.seed,
        "start_room": spec.start_room,
        "rooms": [
            {
                "name": room.name,
                "exits": [
                    {"direction": ex.direction, "to": ex.to, "door": ex.door}
                    for ex in room.exits
                ],
            }
            for room in spec.rooms
        ],
        "doors": [
            {
                "name": d.name,
                "room_a": d.room_a,
                "direction_from_a": d.direction_from_a,
                "room_b": d.room_b,
                "open": d.open,
            }
            for d in spec.doors
        ],
        "objects": [
            {
                "name": o.name,
                "kind": o.kind,
                "holder": o.holder,
                "holder_relation": o.holder_relation,
                "cut_state": o.cut_state,
                "cook_state": o.cook_state,
                "edible": o.edible,
            }
            for o in spec.objects
        ],
        "recipe": [
            {"ingredient": e.ingredient, "cut": e.cut, "cook": e.cook} for e in spec.recipe
        ],
        "max_score": spec.max_score,
    }


def spec_from_dict(doc: Mapping) -> GameSpec:
    def need(mapping: Mapping, key: str, where: str):
        if key not in mapping:
            raise SpecParseError(f"missing field {key!r} in {where}")
        return mapping[key]

    if not isinstance(doc, Mapping):
        raise SpecParseError("top level must be an object")
    version = need(doc, "format_version", "document")
    if version != FORMAT_VERSION:
        raise SpecParseError(f"unsupported format_version {version!r}")
    try:
        rooms = tuple(
            RoomSpec(
                name=need(r, "name", "room"),
                exits=tuple(
                    Exit(
                        direction=need(e, "direction", "exit"),
                        to=need(e, "to", "exit"),
                        door=e.get("door"),
                    )
                    for e in r.get("exits", [])
                ),
            )
            for r in need(doc, "rooms", "document")
        )
        doors = tuple(
            DoorSpec(
                name=need(d, "name", "door"),
                room_a=need(d, "room_a", "door"),
                direction_from_a=need(d, "direction_from_a", "door"),
                room_b=need(d, "room_b", "door"),
                open=bool(need(d, "open", "door")),
            )
            for d in doc.get("doors", [])
        )
        objects = tuple(
            ObjectSpec(
                name=need(o, "name", "object"),
                kind=need(o, "kind", "object"),
                holder=need(o, "holder", "object"),
                holder_relation=need(o, "holder_relation", "object"),
                cut_state=o.get("cut_state", "none"),
                cook_state=o.get("cook_state", "none"),
                edible=bool(o.get("edible", False)),
            )
            for o in need(doc, "objects", "document")
        )
        recipe = tuple(
            RecipeEntry(
                ingredient=need(e, "ingredient", "recipe entry"),
                cut=e.get("cut", "none"),
                cook=e.get("cook", "none"),
            )
            for e in need(doc, "recipe", "document")
        )
    except TypeError as exc:
        raise SpecParseError(f"malformed collection: {exc}") from exc
    spec = GameSpec(
        level=need(doc, "level", "document"),
        seed=int(need(doc, "seed", "document")),
        start_room=need(doc, "start_room", "document"),
        rooms=rooms,
        doors=doors,
        objects=objects,
        recipe=recipe,
        max_score=int(need(doc, "max_score", "document")),
    )
    validate_spec(spec)
    return spec


def dumps_spec(spec: GameSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n"


def save_game(spec: GameSpec, path: str | Path) -> None:
    Path(path).write_text(dumps_spec(spec))


def loads_spec(text: str) -> GameSpec:
    if not text.strip():
        raise SpecParseError("empty document")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return spec_from_dict(doc)


def load_game(path: str | Path) -> GameSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}") from exc
    return loads_spec(text)
