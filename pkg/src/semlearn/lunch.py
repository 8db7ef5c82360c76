"""The lunch problem: an agent on a grid must eat four dishes in human order.

The environment enforces the order: stepping onto the next required dish
picks it up, stepping onto any other dish leaves it in place.  The agent is
never told the order and receives no reward.  It learns from logged
transitions alone:

1. every transition becomes an object of a factual model, with one category
   per true fluent (``Front_soup``, ``Eaten_appetizer``, ``Act_moveForward``,
   ``Center_soup``, ``PickedUp``);
2. for the root goal ``G_dessert`` it mines action laws over front/action
   fluents; the best of them is uncertain;
3. adding the ``Eaten`` fluents to the vocabulary yields a certain law whose
   ``E_<dish>`` premise names a new subgoal, and the process repeats.
"""

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .concepts import CategoryIs, Concept, ConceptSet, Literal
from .encoding import build_index
from .errors import InsufficientExploration, InvalidParams, NoLawFound
from .facts import Categorical, FactualModel
from .miner import MiningParams, mine_laws
from .rules import Law, LawSet, Rule, conditional_probability, explain, format_fraction, parse_fraction

__all__ = [
    "DISHES",
    "ACTIONS",
    "GridWorld",
    "Transition",
    "SubgoalNode",
    "step",
    "random_policy",
    "run_episode",
    "simulate",
    "collect_logs",
    "transitions_to_kb",
    "invent_subgoals",
    "SubgoalPolicy",
    "evaluate_agent",
    "reachable_states",
    "episode_seeds",
    "rule_probability",
    "lunch_concepts",
]

DISHES = ("appetizer", "soup", "mainCourse", "dessert")
ACTIONS = ("moveForward", "turnLeft", "turnRight")
ACTION_CONCEPT = {"moveForward": "Act_forward", "turnLeft": "Act_left", "turnRight": "Act_right"}
CONCEPT_ACTION = {v: k for k, v in ACTION_CONCEPT.items()}
HEADINGS = "NESW"
STEP_DELTA = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


@dataclass(frozen=True)
class GridWorld:
    """One lunch world.  ``dishes`` maps each uneaten dish to its cell."""

    width: int
    height: int
    dishes: Tuple[Tuple[str, Tuple[int, int]], ...]
    agent: Tuple[int, int, str]
    eaten: Tuple[str, ...] = ()
    order: Tuple[str, ...] = DISHES
    rng_seed: int = 0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise InvalidParams("grid must be at least 2x2")
        cells = [cell for _, cell in self.dishes]
        if len(set(cells)) != len(cells):
            raise InvalidParams("dish cells must be distinct")
        x, y, heading = self.agent
        if not (0 <= x < self.width and 0 <= y < self.height) or heading not in HEADINGS:
            raise InvalidParams(f"agent {self.agent} outside the grid")

    @classmethod
    def random(cls, width=5, height=5, seed=0, order=DISHES):
        """Dishes and agent placed on distinct random cells."""
        order = tuple(order)
        if len(order) + 1 > width * height:
            raise InvalidParams(f"{len(order)} dishes and an agent do not fit a {width}x{height} grid")
        rng = np.random.default_rng(seed)
        cells = rng.choice(width * height, size=len(order) + 1, replace=False)
        placed = tuple((d, (int(c) % width, int(c) // width)) for d, c in zip(order, cells))
        a = int(cells[-1])
        heading = HEADINGS[int(rng.integers(4))]
        return cls(width, height, placed, (a % width, a // width, heading), (), order, int(seed))

    def _evolve(self, agent, dishes=None, eaten=None):
        # internal fast path for step(); the invariants hold by construction
        new = object.__new__(GridWorld)
        for name, value in (
            ("width", self.width), ("height", self.height),
            ("dishes", self.dishes if dishes is None else dishes),
            ("agent", agent), ("eaten", self.eaten if eaten is None else eaten),
            ("order", self.order), ("rng_seed", self.rng_seed),
        ):
            object.__setattr__(new, name, value)
        return new

    def dish_at(self, cell):
        for dish, c in self.dishes:
            if c == cell:
                return dish
        return None

    def cell_of(self, dish):
        for d, c in self.dishes:
            if d == dish:
                return c
        return None

    def front_cell(self):
        x, y, heading = self.agent
        dx, dy = STEP_DELTA[heading]
        nx, ny = x + dx, y + dy
        if 0 <= nx < self.width and 0 <= ny < self.height:
            return nx, ny
        return None

    @property
    def next_dish(self):
        return self.order[len(self.eaten)] if len(self.eaten) < len(self.order) else None

    @property
    def done(self):
        return len(self.eaten) == len(self.order)

    def front_fluents(self):
        cell = self.front_cell()
        ahead = self.dish_at(cell) if cell is not None else None
        return {d: d == ahead for d in self.order}

    def eaten_fluents(self):
        return {d: d in self.eaten for d in self.order}


@dataclass(frozen=True)
class Transition:
    """Fluents before an action and what the action achieved."""

    front: dict
    eaten: dict
    action: str
    center: dict
    picked_up: bool

    def to_dict(self):
        return {
            "action": self.action,
            "front": dict(self.front),
            "eaten": dict(self.eaten),
            "center": dict(self.center),
            "picked_up": self.picked_up,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["front"], d["eaten"], d["action"], d["center"], d["picked_up"])


def _turn(heading, by):
    return HEADINGS[(HEADINGS.index(heading) + by) % 4]


def _advance(world, action):
    """The state update alone: ``(new_world, entered_dish, picked_up)``."""
    x, y, heading = world.agent
    if action == "turnLeft":
        return world._evolve((x, y, _turn(heading, -1))), None, False
    if action == "turnRight":
        return world._evolve((x, y, _turn(heading, 1))), None, False
    if action != "moveForward":
        raise InvalidParams(f"unknown action {action!r}")
    cell = world.front_cell()
    if cell is None:
        return world, None, False
    entered = world.dish_at(cell)
    agent = (cell[0], cell[1], heading)
    if entered is not None and entered == world.next_dish:
        dishes = tuple(p for p in world.dishes if p[0] != entered)
        return world._evolve(agent, dishes, world.eaten + (entered,)), entered, True
    return world._evolve(agent), entered, False


def step(world, action):
    """Apply one action; returns ``(new_world, transition)``."""
    front = world.front_fluents()
    eaten = world.eaten_fluents()
    new, entered, picked = _advance(world, action)
    center = {d: d == entered for d in world.order}
    return new, Transition(front, eaten, action, center, picked)


def random_policy(world, rng):
    return ACTIONS[int(rng.integers(len(ACTIONS)))]


def simulate(world, policy, max_steps, rng=None):
    """Run until every dish is eaten or ``max_steps``; returns ``(world, transitions)``."""
    if max_steps < 1:
        raise InvalidParams("max_steps must be >= 1")
    if rng is None:
        rng = np.random.default_rng([world.rng_seed, 1])
    log = []
    for _ in range(max_steps):
        world, tr = step(world, policy(world, rng))
        log.append(tr)
        if world.done:
            break
    return world, log


def run_episode(world, policy, max_steps):
    return simulate(world, policy, max_steps)[1]


def episode_seeds(seed, n):
    """Per-episode seeds split from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def step_budget(width, height, n_dishes):
    return 4 * width * height * n_dishes


def collect_logs(n_episodes, seed, width=5, height=5, order=DISHES, max_steps=None,
                 min_successes=3, max_rounds=10):
    """Random-policy exploration logs, one list of transitions per episode.

    Runs ``n_episodes`` episodes; if some dish was picked up fewer than
    ``min_successes`` times, keeps running further batches of the same size
    (up to ``max_rounds`` batches in total).
    """
    max_steps = step_budget(width, height, len(order)) if max_steps is None else max_steps
    logs = []
    successes = dict.fromkeys(order, 0)
    for round_ in range(max_rounds):
        for s in episode_seeds([seed, round_], n_episodes):
            world = GridWorld.random(width, height, s, order)
            _, log = simulate(world, random_policy, max_steps)
            for tr in log:
                if tr.picked_up:
                    successes[next(d for d, c in tr.center.items() if c)] += 1
            logs.append(log)
        if min(successes.values()) >= min_successes:
            break
    return logs


def dump_logs(logs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e, log in enumerate(logs):
            for i, tr in enumerate(log):
                fh.write(json.dumps({"episode": e, "step": i, **tr.to_dict()}, separators=(",", ":")))
                fh.write("\n")


def load_logs(path):
    logs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            while len(logs) <= d["episode"]:
                logs.append([])
            logs[d["episode"]].append(Transition.from_dict(d))
    return logs


# -- encoding as a factual model ------------------------------------------------


def _flatten(logs):
    for item in logs:
        if isinstance(item, Transition):
            yield item
        else:
            yield from item


def lunch_concepts(dishes=DISHES):
    """Fluent, action and goal concepts for the given dishes."""
    concepts = []
    for d in dishes:
        concepts.append(Concept(f"F_{d}", (CategoryIs(f"Front_{d}"),)))
    for d in dishes:
        concepts.append(Concept(f"E_{d}", (CategoryIs(f"Eaten_{d}"),)))
    for action, name in ACTION_CONCEPT.items():
        concepts.append(Concept(name, (CategoryIs(f"Act_{action}"),)))
    for d in dishes:
        concepts.append(Concept(f"NextCenter_{d}", (CategoryIs(f"Center_{d}"),)))
    concepts.append(Concept("NextPicked", (CategoryIs("PickedUp"),)))
    for d in dishes:
        concepts.append(Concept(f"G_{d}", (CategoryIs(f"Center_{d}"), CategoryIs("PickedUp"))))
    return ConceptSet(concepts)


def transitions_to_kb(logs, dishes=None):
    """One object per transition, one category per true fluent.

    ``logs`` may be a flat list of transitions or a list of episodes.
    Returns ``(model, concepts)``.
    """
    transitions = list(_flatten(logs))
    if dishes is None:
        dishes = tuple(transitions[0].front) if transitions else DISHES
    model = FactualModel()
    add = model.assert_fact
    for i, tr in enumerate(transitions):
        obj = f"t{i}"
        add(Categorical("Transition", obj))
        add(Categorical(f"Act_{tr.action}", obj))
        for d in dishes:
            if tr.front[d]:
                add(Categorical(f"Front_{d}", obj))
            if tr.eaten[d]:
                add(Categorical(f"Eaten_{d}", obj))
            if tr.center[d]:
                add(Categorical(f"Center_{d}", obj))
        if tr.picked_up:
            add(Categorical("PickedUp", obj))
    return model.freeze(), lunch_concepts(dishes)


# -- subgoal invention ----------------------------------------------------------


@dataclass
class SubgoalNode:
    """A goal, the certain law achieving it, and the subgoal that law needs."""

    goal: str
    law: Law
    requires: Optional["SubgoalNode"] = None
    uncertain_p: Optional[Fraction] = None
    invented: Optional[str] = None

    @property
    def dish(self):
        return self.goal[2:]

    @property
    def action(self):
        for lit in self.law.premises:
            if lit.positive and lit.concept in CONCEPT_ACTION:
                return CONCEPT_ACTION[lit.concept]
        return None

    def chain(self):
        node, out = self, []
        while node is not None:
            out.append(node)
            node = node.requires
        return out

    @property
    def depth(self):
        return len(self.chain())

    def to_dict(self):
        return [
            {
                "goal": n.goal,
                "law": n.law.to_dict(),
                "requires": n.requires.goal if n.requires else None,
                "invented": n.invented,
                "uncertain_p": format_fraction(n.uncertain_p),
            }
            for n in self.chain()
        ]

    @classmethod
    def from_dict(cls, records):
        nodes = [
            cls(r["goal"], Law.from_dict(r["law"]), None, parse_fraction(r.get("uncertain_p")), r.get("invented"))
            for r in records
        ]
        for parent, child in zip(nodes, nodes[1:]):
            parent.requires = child
        return nodes[0] if nodes else None

    def render(self, concepts=None):
        lines = []
        for depth, node in enumerate(self.chain()):
            body = " ∧ ".join(str(lit) for lit in node.law.premises) or "∅"
            line = f"{'  ' * depth}{node.goal} <= {body} [[{format_fraction(node.law.p)}]]"
            if node.uncertain_p is not None:
                line += f"  (without subgoal: {format_fraction(node.uncertain_p)})"
            lines.append(line)
            if concepts is not None:
                lines.append(f"{'  ' * depth}  {explain(node.law, concepts)}")
        return "\n".join(lines)


def _certain_law(laws):
    certain = [law for law in laws if law.p == 1]
    if not certain:
        return None
    return min(certain, key=lambda law: law.rule.sort_key())


def invent_subgoals(index, dishes=DISHES, root="dessert", max_premises=3, min_support=3):
    """Build the subgoal chain starting from the root goal.

    ``index`` is a :class:`~semlearn.encoding.LiteralIndex` over
    :func:`transitions_to_kb` output (or the ``(model, concepts)`` pair).
    Returns ``(root_node, law_set)``.
    """
    if isinstance(index, tuple):
        index = build_index(*index)
    fronts = [f"F_{d}" for d in dishes]
    acts = list(ACTION_CONCEPT.values())
    eaten = [f"E_{d}" for d in dishes]
    all_laws = []
    nodes = []
    goal = root
    while True:
        if goal in [n.dish for n in nodes]:
            raise NoLawFound(f"subgoal cycle at {goal!r}")
        target = Literal(f"G_{goal}")
        reached = index.count([Literal(f"F_{goal}"), Literal("Act_forward"), target])
        if reached < min_support:
            raise InsufficientExploration(
                f"{goal!r} was reached only {reached} time(s); need {min_support}"
            )

        def mine(vocab):
            params = MiningParams(
                targets=(target,),
                vocabulary=tuple(vocab) + (target.concept,),
                max_premises=max_premises,
                min_support=min_support,
                min_p=0,
            )
            laws = mine_laws(index, params)
            all_laws.extend(laws)
            return laws

        first = mine(fronts + acts)
        law = _certain_law(first)
        uncertain_p = None
        if law is None:
            uncertain_p = max(l.p for l in first) if len(first) else None
            law = _certain_law(mine(fronts + acts + eaten))
            if law is None:
                raise NoLawFound(f"no certain law for G_{goal} within {max_premises} premises")
        needs = [lit.concept[2:] for lit in law.premises if lit.positive and lit.concept in eaten]
        nodes.append(SubgoalNode(f"G_{goal}", law, None, uncertain_p, f"E_{needs[0]}" if needs else None))
        if not needs:
            break
        goal = needs[0]
    for parent, child in zip(nodes, nodes[1:]):
        parent.requires = child
    unique = list(dict.fromkeys(all_laws))
    return nodes[0], LawSet(unique, {"root": f"G_{root}", "fingerprint": index.fingerprint})


def rule_probability(index, premises, goal):
    """Probability of ``premises -> G_goal`` on a transition index."""
    rule = Rule(tuple(Literal(p) for p in premises), Literal(f"G_{goal}"))
    return conditional_probability(index, rule)


# -- acting -------------------------------------------------------------------------


def _path_to_front(world, target):
    """Shortest action sequence leaving ``target`` directly ahead."""
    start = world.agent
    seen = {start: None}
    queue = deque([start])
    while queue:
        pose = queue.popleft()
        x, y, heading = pose
        dx, dy = STEP_DELTA[heading]
        if (x + dx, y + dy) == target:
            actions = []
            while seen[pose] is not None:
                pose, action = seen[pose]
                actions.append(action)
            return actions[::-1]
        moves = [("turnLeft", (x, y, _turn(heading, -1))), ("turnRight", (x, y, _turn(heading, 1)))]
        nx, ny = x + dx, y + dy
        if 0 <= nx < world.width and 0 <= ny < world.height:
            moves.insert(0, ("moveForward", (nx, ny, heading)))
        for action, nxt in moves:
            if nxt not in seen:
                seen[nxt] = (pose, action)
                queue.append(nxt)
    return None


class SubgoalPolicy:
    """Follow the chain: pursue the deepest unmet subgoal.

    When the dish of that subgoal is directly ahead the policy executes its
    law's action; otherwise it takes the first step of a shortest path to a
    pose facing the dish.
    """

    def __init__(self, root):
        self.nodes = root.chain()[::-1] if root is not None else []

    def __call__(self, world, rng):
        for node in self.nodes:
            if node.dish not in world.eaten:
                break
        else:
            return random_policy(world, rng)
        cell = world.cell_of(node.dish)
        if cell is None:
            return random_policy(world, rng)
        if world.front_cell() == cell:
            return node.action or "moveForward"
        path = _path_to_front(world, cell)
        return path[0] if path else random_policy(world, rng)


def evaluation_episodes(root, n_episodes, seed, width=5, height=5, order=DISHES, policy=None):
    """Yield ``(start_world, transitions, final_world)`` for each test episode."""
    if policy is None:
        policy = SubgoalPolicy(root) if root is not None else random_policy
    budget = step_budget(width, height, len(order))
    for s in episode_seeds(seed, n_episodes):
        start = GridWorld.random(width, height, s, order)
        final, log = simulate(start, policy, budget)
        yield start, log, final


def evaluate_agent(root, n_episodes, seed, width=5, height=5, order=DISHES, policy=None):
    """Fraction of fresh random layouts on which every dish gets eaten in order."""
    wins = total = 0
    for _, _, final in evaluation_episodes(root, n_episodes, seed, width, height, order, policy):
        total += 1
        wins += final.eaten == tuple(order)
    return Fraction(wins, total) if total else Fraction(0)


def reachable_states(world):
    """Breadth-first enumeration of every world state reachable from ``world``."""
    seen = {world}
    queue = deque([world])
    while queue:
        state = queue.popleft()
        if state.done:
            continue
        for action in ACTIONS:
            nxt = _advance(state, action)[0]
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen
