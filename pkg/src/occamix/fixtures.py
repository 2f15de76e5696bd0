"""Built-in hypothesis pools and the task files they pair with."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

# (id, description, sub_hypotheses, program)
_TASK_A_6 = [
    ("a1", "Different cells in the input grid replicate vertically while maintaining column locations.",
     ["Each coloured cell copies itself up and down its own column."],
     "replicate_vertical(direction=both, until=edge)"),
    ("a2", "Objects propagate vertically up and down until blocked.",
     ["Each object grows along its column until it reaches another colour or the border of the grid."],
     "replicate_vertical(direction=both, until=blocked)"),
    ("a3", "Objects duplicated vertically across grid height.",
     ["The topmost colour of every occupied column is copied into every row."],
     "fill_column()"),
    ("a4", "Objects expand vertically to top/bottom while preserving column.",
     ["Objects in even columns extend to the top edge.",
      "Objects in odd columns keep their position and size."],
     "per_column(parity=even, inner=replicate_vertical(direction=up, until=edge))"),
    ("a5", "Objects duplicated from top to bottom across grid.",
     ["Each coloured cell is repeated in every row below it, down to the bottom edge of the grid, "
      "while cells above it stay as they were."],
     "replicate_vertical(direction=down, until=edge)"),
    ("a6", "Objects translated vertically, repeating in straight lines.",
     ["Each object is copied one cell below its original position.",
      "The pair is then copied two cells further down, so a vertical line of up to four cells forms "
      "beneath the original object, clipped at the bottom border of the grid."],
     "duplicate_offset(dx=0, dy=1); duplicate_offset(dx=0, dy=2)"),
]

_TASK_B_6 = [
    ("b1", "Objects moved from original location to grid center, maintaining pattern.",
     ["Shape and colour are unchanged."],
     "move_to_center()"),
    ("b2", "Cross-shaped clusters repositioned to grid center.",
     ["Red crosses are moved so that their middle cell sits on the grid centre."],
     "per_object(inner=move_to_center(), color=2)"),
    ("b3", "Unique shape rotates 90° counterclockwise.",
     ["The whole grid turns a quarter turn counterclockwise around its centre cell.",
      "Because the grid is square, every cell stays inside the grid after the turn, and the colours "
      "of the shape are left as they were."],
     "rotate(quarter_turns=1)"),
    ("b4", "Objects move toward center, shape and color preserved.",
     ["The object moves exactly one row down, towards the middle of the grid.",
      "Its shape, size and colour are preserved, and nothing moves sideways."],
     "translate(dx=0, dy=1)"),
    ("b5", "Object shifts diagonally top-left to center.",
     ["The object moves one cell down and one cell to the right, from the top-left region of the grid "
      "towards the centre."],
     "translate(dx=1, dy=1)"),
    ("b6", "Objects repositioned into central '+' shape.",
     ["The object is moved so that its bounding box is centred in the grid.",
      "Green cells (colour 3) are repainted red (colour 2) to match the first example.",
      "Yellow cells (colour 4) are also repainted red (colour 2), so every output cross is red.",
      "All remaining cells stay background."],
     "move_to_center(); recolor(from=3, to=2); recolor(from=4, to=2)"),
]

_TASK_C_20 = [
    ("c01", "Objects duplicated downward until blocked.", [],
     "replicate_vertical(direction=down, until=blocked)"),
    ("c02", "Objects replicated vertically in output grid.", [],
     "replicate_vertical(direction=both, until=edge)"),
    ("c03", "Downward replication based on object color counts.", [],
     "duplicate_offset(dx=0, dy=1)"),
    ("c04", "Objects fill columns top to bottom.", [],
     "fill_column()"),
    ("c05", "Column filled with object copies, same color/position.", [],
     "replicate_vertical(direction=both, until=blocked)"),
    ("c06", "Each object extended vertically across grid height.", [],
     "per_object(inner=replicate_vertical(direction=both, until=edge))"),
    ("c07", "Colored objects expand upward until blocked.",
     ["Cells grow upward."],
     "replicate_vertical(direction=up, until=blocked)"),
    ("c08", "Objects duplicated above and below until filled.",
     ["Copies appear directly above and below."],
     "duplicate_offset(dx=0, dy=1); duplicate_offset(dx=0, dy=-1)"),
    ("c09", "Objects repeated in column across all rows.",
     ["Only odd columns are filled."],
     "per_column(parity=odd, inner=fill_column())"),
    ("c10", "Objects extend vertically to cover column.",
     ["Only even columns are covered, top to bottom."],
     "per_column(parity=even, inner=replicate_vertical(direction=both, until=edge))"),
    ("c11", "Objects expand up/down by 2–4 cells depending on relations.",
     ["Each object is copied two rows above and two rows below."],
     "duplicate_offset(dx=0, dy=2); duplicate_offset(dx=0, dy=-2)"),
    ("c12", "Objects expand downward, or upward if at bottom.",
     ["Every cell extends down to the bottom edge of its column."],
     "replicate_vertical(direction=down, until=edge)"),
    ("c13", "Objects shifted/expanded vertically based on relations.",
     ["Each object moves down by one row.", "A copy is left one row above the new position."],
     "translate(dx=0, dy=1); duplicate_offset(dx=0, dy=-1)"),
    ("c14", "Vertical replications depend on object position.",
     ["Objects in odd columns extend down to the bottom edge.",
      "Objects in even columns are left where they are."],
     "per_column(parity=odd, inner=replicate_vertical(direction=down, until=edge))"),
    ("c15", "Objects arranged into columns by type.",
     ["The grid is mirrored left to right so that columns swap places."],
     "reflect(axis=v)"),
    ("c16", "Vertical replication equals initial row index + 1.",
     ["Each object leaves a copy of itself in the row directly above.",
      "The original object stays in place."],
     "duplicate_offset(dx=0, dy=-1)"),
    ("c17", "Objects replicated horizontally to row edges.",
     ["Every coloured cell is copied left and right along its row until the grid border.",
      "This is done by turning the grid, replicating along columns, and turning it back."],
     "rotate(quarter_turns=1); replicate_vertical(direction=both, until=edge); rotate(quarter_turns=-1)"),
    ("c18", "Colored cells expand vertically until blocked.",
     ["Cells in even columns grow upward until they meet another colour or the top edge.",
      "Cells in odd columns do not move and do not grow in either direction."],
     "per_column(parity=even, inner=replicate_vertical(direction=up, until=blocked))"),
    ("c19", "Distinct colors duplicated in vertical columns.",
     ["Each object, taken on its own, is copied one row below its position.",
      "Objects are processed from the top-left to the bottom-right of the grid.",
      "Where copies land on other objects the later copy is kept."],
     "per_object(inner=duplicate_offset(dx=0, dy=1))"),
    ("c20", "Objects stretch downward; overlaps overwrite.",
     ["Every coloured cell is stretched downward through all rows below it until it reaches the bottom "
      "border of the grid.",
      "Where two stretched objects overlap in the same column, the object that starts lower in the grid "
      "overwrites the cells of the object above it, so the lower colour wins in the overlap region.",
      "Cells above each object are not changed, and no object is moved horizontally or recoloured "
      "during the transformation."],
     "replicate_vertical(direction=down, until=edge)"),
]

_CLEAN_SINGLE = [
    ("s1", "Move the object to the centre of the grid.", [], "move_to_center()"),
]

# descriptions chosen to share one token count
_DEGENERATE_EQUAL_LENGTH = [
    ("e1", "Move object to centre.", [], "move_to_center()"),
    ("e2", "Rotate grid one turn.", [], "rotate(quarter_turns=1)"),
    ("e3", "Mirror rows top down.", [], "reflect(axis=h)"),
]

FIXTURES: dict[str, list[tuple]] = {
    "task_a_6": _TASK_A_6,
    "task_b_6": _TASK_B_6,
    "task_c_20": _TASK_C_20,
    "clean_single": _CLEAN_SINGLE,
    "degenerate_equal_length": _DEGENERATE_EQUAL_LENGTH,
}

# bundled task each fixture was written for
FIXTURE_TASKS = {
    "task_a_6": "task_a",
    "task_b_6": "task_b",
    "task_c_20": "task_c",
    "clean_single": "task_b",
    "degenerate_equal_length": "task_b",
}

# the paired fixture for each bundled task, used by ``--fixture auto``
TASK_FIXTURES = {"task_a": "task_a_6", "task_b": "task_b_6", "task_c": "task_c_20"}


def fixture_records(fixture_id: str) -> list[dict]:
    return [{"id": i, "description": d, "sub_hypotheses": list(s), "program": p}
            for i, d, s, p in FIXTURES[fixture_id]]


def data_path(name: str) -> Path:
    """Path to a bundled data file such as ``task_a.json``."""
    return Path(str(resources.files("occamix") / "data" / name))


def builtin_task_path(task_name: str) -> Path:
    return data_path(f"{task_name}.json")
