"""Oracle action sequences that finish a game with the maximum score."""

from __future__ import annotations

from dataclasses import dataclass

from .spec import CONTAINER_NAMES, GameSpec
from .state import DEFAULT_STEP_LIMIT, admissible_actions, reset, step

CUT_VERB_FOR = {"chopped": "chop", "diced": "dice", "sliced": "slice"}
APPLIANCE_FOR = {"fried": "stove", "roasted": "oven"}


class WalkthroughError(RuntimeError):
    """The solver could not finish the game (generator/engine bug)."""


@dataclass
class WalkthroughStats:
    actions: list[str]
    reset_triplets: int
    mean_admissible: float
    final_score: int


def _route(spec: GameSpec, src: str, dst: str) -> list[tuple[str, str | None]]:
    """(direction, door) hops from src to dst, BFS over the room graph."""
    if src == dst:
        return []
    frontier = [src]
    back: dict[str, tuple[str, str, str | None]] = {}
    seen = {src}
    while frontier:
        here = frontier.pop(0)
        for ex in spec.room(here).exits:
            if ex.to not in seen:
                seen.add(ex.to)
                back[ex.to] = (here, ex.direction, ex.door)
                frontier.append(ex.to)
    if dst not in back:
        raise WalkthroughError(f"no route {src} -> {dst}")
    hops = []
    cursor = dst
    while cursor != src:
        prev, direction, door = back[cursor]
        hops.append((direction, door))
        cursor = prev
    hops.reverse()
    return hops


class _Driver:
    def __init__(self, spec: GameSpec, step_limit: int):
        self.spec = spec
        self.state, self.obs = reset(spec, step_limit=step_limit)
        self.actions: list[str] = []
        self.admissible_sizes: list[int] = []
        self.reset_triplets = len(self.obs)

    def do(self, action: str) -> None:
        self.admissible_sizes.append(len(admissible_actions(self.state)))
        self.state, self.obs, _, _ = step(self.state, action)
        self.actions.append(action)

    def goto(self, room: str) -> None:
        for direction, door in _route(self.spec, self.state.player_room, room):
            if door is not None and not self.state.open_flags[door]:
                self.do(f"open {door}")
            self.do(f"go {direction}")

    def fetch(self, name: str) -> None:
        loc = self.state.locations[name]
        if loc is not None and loc[1] == "player":
            return
        rel, holder = loc
        room = self.state.room_of(name)
        self.goto(room)
        if rel == "in" and holder in CONTAINER_NAMES:
            if not self.state.open_flags[holder]:
                self.do(f"open {holder}")
            self.do(f"take {name} from {holder}")
        elif rel == "at":
            self.do(f"take {name}")
        else:
            self.do(f"take {name} from {holder}")


def solve(spec: GameSpec, step_limit: int = DEFAULT_STEP_LIMIT) -> WalkthroughStats:
    driver = _Driver(spec, step_limit)
    # read the recipe first, the way a player would
    driver.goto(driver.state.room_of("cookbook"))
    driver.do("examine cookbook")
    for entry in spec.recipe:
        driver.fetch(entry.ingredient)
    needs_knife = any(entry.cut != "none" for entry in spec.recipe)
    if needs_knife:
        driver.fetch("knife")
    driver.goto("kitchen")
    for entry in spec.recipe:
        if entry.cut != "none":
            driver.do(f"{CUT_VERB_FOR[entry.cut]} {entry.ingredient} with knife")
    if needs_knife:
        driver.do("drop knife")
    for entry in spec.recipe:
        if entry.cook != "none":
            driver.do(f"cook {entry.ingredient} with {APPLIANCE_FOR[entry.cook]}")
    driver.do("prepare meal")
    driver.do("eat meal")

    state = driver.state
    if not state.done or state.lost or state.score != spec.max_score:
        raise WalkthroughError(
            f"walkthrough ended with score {state.score}/{spec.max_score}, "
            f"done={state.done}, lost={state.lost}"
        )
    mean_adm = sum(driver.admissible_sizes) / len(driver.admissible_sizes)
    return WalkthroughStats(
        actions=driver.actions,
        reset_triplets=driver.reset_triplets,
        mean_admissible=mean_adm,
        final_score=state.score,
    )


def walkthrough(spec: GameSpec, step_limit: int = DEFAULT_STEP_LIMIT) -> list[str]:
    return solve(spec, step_limit).actions
