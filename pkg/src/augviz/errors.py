"""Exception hierarchy shared by all augviz modules."""


class AugvizError(Exception):
    """Base class for every error raised by this package."""


# --- spec parsing ---------------------------------------------------------

class SpecParseError(AugvizError):
    """A document could not be turned into a Spec."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


class SpecSyntaxError(SpecParseError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnknownFieldError(SpecParseError):
    def __init__(self, path: str):
        super().__init__(f"unknown field: {path}", path)


class TypeMismatchError(SpecParseError):
    def __init__(self, path: str, expected: str):
        super().__init__(f"{path}: expected {expected}", path)
        self.expected = expected


class ModeConflictError(SpecParseError):
    """The shape of the ar block contradicts its declared mode."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}", path)


class InvalidSpecError(AugvizError):
    """A parsed spec failed schema validation; carries the issue list."""

    def __init__(self, issues):
        super().__init__("; ".join(i.message for i in issues) or "invalid spec")
        self.issues = list(issues)


# --- expressions ----------------------------------------------------------

class ExprError(AugvizError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at offset {pos}")
        self.pos = pos


class UnknownFieldRefError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"expression references unknown field: {name}")
        self.name = name


# --- dataflow -------------------------------------------------------------

class TransformError(AugvizError):
    pass


class MissingFieldError(TransformError):
    def __init__(self, field: str, table: str = ""):
        where = f" in dataset '{table}'" if table else ""
        super().__init__(f"missing field '{field}'{where}")
        self.field = field


class CyclicHierarchyError(TransformError):
    def __init__(self, node_id):
        super().__init__(f"cyclic hierarchy at node {node_id!r}")
        self.node_id = node_id


class DuplicateNodeIdError(TransformError):
    def __init__(self, node_id):
        super().__init__(f"duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingParentError(TransformError):
    def __init__(self, node_id, parent):
        super().__init__(f"node {node_id!r} references missing parent {parent!r}")
        self.node_id = node_id
        self.parent = parent


class HeterogeneousRowsError(AugvizError):
    def __init__(self, row_index: int, detail: str = ""):
        super().__init__(f"row {row_index} does not match table columns"
                         + (f": {detail}" if detail else ""))
        self.row_index = row_index


class PipelineError(AugvizError):
    """Wraps a transform failure with the dataset and stage it occurred at."""

    def __init__(self, dataset: str, stage_index: int, cause: Exception):
        super().__init__(f"dataset '{dataset}' stage {stage_index}: {cause}")
        self.dataset = dataset
        self.stage_index = stage_index
        self.cause = cause


class PipelineShapeMismatchError(AugvizError):
    pass


# --- scales / encoding ----------------------------------------------------

class ScaleError(AugvizError):
    pass


class EmptyDomainError(ScaleError):
    def __init__(self, scale: str):
        super().__init__(f"scale '{scale}' has an empty data-driven domain")
        self.scale = scale


class NonNumericDomainError(ScaleError):
    def __init__(self, scale: str, value):
        super().__init__(f"scale '{scale}' needs a numeric domain, got {value!r}")
        self.scale = scale


class EncodeError(AugvizError):
    pass


class ChannelScaleMismatchError(EncodeError):
    def __init__(self, mark: str, channel: str, detail: str):
        super().__init__(f"mark '{mark}' channel '{channel}': {detail}")
        self.channel = channel


# --- augmentation ---------------------------------------------------------

class AppendSchemaMismatchError(AugvizError):
    def __init__(self, dataset: str, field: str):
        super().__init__(f"append to '{dataset}' does not match its columns"
                         f" (field '{field}')")
        self.dataset = dataset
        self.field = field


class NoArBlockError(AugvizError):
    def __init__(self):
        super().__init__("spec has no ar block")


# --- spec hub -------------------------------------------------------------

class HubError(AugvizError):
    pass


class UnknownIdError(HubError):
    def __init__(self, spec_id: str):
        super().__init__(f"unknown spec id: {spec_id}")
        self.spec_id = spec_id


class UnknownVersionError(HubError):
    def __init__(self, spec_id: str, version: int):
        super().__init__(f"spec {spec_id} has no version {version}")
        self.spec_id = spec_id
        self.version = version


class ValidationFailedError(HubError):
    """Publish refused because the validator verdict was invalid."""

    def __init__(self, report):
        super().__init__("validation failed")
        self.report = report
