from dataclasses import dataclass, field

from kypherhound.errors import SchemaError
from kypherhound.model.values import EMPTY, KgtkValue

NODE1 = "node1"
LABEL = "label"
NODE2 = "node2"
ID = "id"

EDGE_ROLES = (NODE1, LABEL, NODE2)


@dataclass(frozen=True)
class ColumnSchema:
    """Ordered column names of a KGTK file, with role positions resolved by name.

    Roles are matched on exact, case-sensitive column names. Extra columns
    (qualifiers such as ``node1;label``) are kept in place.
    """

    columns: tuple[str, ...]
    roles: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        columns = tuple(self.columns)
        object.__setattr__(self, "columns", columns)
        seen = set()
        for name in columns:
            if not name:
                raise SchemaError("empty column name in header")
            if "\t" in name or "\n" in name:
                raise SchemaError(f"column name contains a tab or line break: {name!r}")
            if name in seen:
                raise SchemaError(f"duplicate column name: {name}")
            seen.add(name)
        roles = {role: columns.index(role) for role in (ID, *EDGE_ROLES) if role in seen}
        object.__setattr__(self, "roles", roles)

    def __len__(self) -> int:
        return len(self.columns)

    @property
    def is_edge_schema(self) -> bool:
        return all(role in self.roles for role in EDGE_ROLES)

    def validate(self, node_file_ok: bool = False) -> "ColumnSchema":
        """Check required roles. Node-list files only need node1."""
        required = (NODE1,) if node_file_ok else EDGE_ROLES
        missing = [role for role in required if role not in self.roles]
        if missing:
            raise SchemaError(f"header is missing required column(s): {', '.join(missing)}")
        return self

    def index_of(self, column: str) -> int:
        try:
            return self.columns.index(column)
        except ValueError:
            raise SchemaError(f"unknown column '{column}' (columns: {', '.join(self.columns)})") from None

    def has(self, column: str) -> bool:
        return column in self.columns

    @classmethod
    def headerless(cls, width: int) -> "ColumnSchema":
        if width == 3:
            return cls((NODE1, LABEL, NODE2))
        if width == 4:
            return cls((ID, NODE1, LABEL, NODE2))
        raise SchemaError(f"cannot infer roles for a headerless file with {width} columns")


@dataclass(frozen=True, slots=True)
class EdgeRecord:
    cells: tuple[KgtkValue, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def get(self, schema: ColumnSchema, column: str) -> KgtkValue:
        """Cell for a column, or Empty when the schema lacks it."""
        position = schema.roles.get(column)
        if position is None:
            if not schema.has(column):
                return EMPTY
            position = schema.index_of(column)
        return self.cells[position]
