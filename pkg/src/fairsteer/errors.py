"""Exception types shared across the package.

Every error raised by fairsteer's own logic derives from FairsteerError so
callers (CLI, service) can map failures to exit codes / HTTP statuses in one
place. Constructor arguments become the message; some carry extra fields used
by the service layer.
"""

from __future__ import annotations


class FairsteerError(Exception):
    """Base class for all package-level errors."""

    code = "error"


class MalformedXml(FairsteerError):
    """Input bytes are not parseable XML / not the expected XES subset."""

    code = "malformed_xml"


class MissingConceptName(FairsteerError):
    """An event lacks the mandatory concept:name attribute."""

    code = "missing_concept_name"

    def __init__(self, trace_index: int, event_index: int):
        self.trace_index = trace_index
        self.event_index = event_index
        super().__init__(
            f"event {event_index} in trace {trace_index} has no concept:name"
        )


class MixedLevelAttribute(FairsteerError):
    """The same attribute name occurs at case and event level with different kinds."""

    code = "mixed_level_attribute"


class UnknownAttribute(FairsteerError):
    """An attribute name does not exist (in the schema / encoding / model)."""

    code = "unknown_attribute"


class EventLevelAttributeUnsupported(FairsteerError):
    """Event-level attributes cannot be used as case features."""

    code = "event_level_attribute_unsupported"


class PrefixOutOfRange(FairsteerError):
    """Requested prefix length exceeds the trace length or is < 1."""

    code = "prefix_out_of_range"


class EmptyLog(FairsteerError):
    """Operation needs at least one trace."""

    code = "empty_log"


class EmptyDataset(FairsteerError):
    """Operation needs at least one sample."""

    code = "empty_dataset"


class InvalidShape(FairsteerError):
    """Model layer sizes are unusable (too few layers or non-positive widths)."""

    code = "invalid_shape"


class DimensionMismatch(FairsteerError):
    """Feature vector width does not match what the model/tree expects."""

    code = "dimension_mismatch"


class LabelDimensionMismatch(FairsteerError):
    """Dataset labels do not fit the model's output layer."""

    code = "label_dimension_mismatch"


class UnknownNode(FairsteerError):
    """No node with the given id exists in the tree."""

    code = "unknown_node"

    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"no node with id {node_id}")


class NotInternal(FairsteerError):
    """The edit needs an internal node but the target is a leaf."""

    code = "not_internal"

    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"node {node_id} is a leaf")


class EditFailed(FairsteerError):
    """An edit in a batch failed; carries the offending edit's index."""

    code = "edit_failed"

    def __init__(self, edit_index: int, cause: Exception):
        self.edit_index = edit_index
        self.cause = cause
        super().__init__(f"edit {edit_index} failed: {cause}")


class InvalidProbability(FairsteerError):
    """Probabilities are outside [0, 1] or do not sum to 1."""

    code = "invalid_probability"


class NonTerminatingModel(FairsteerError):
    """The process model can reach a state from which END is unreachable."""

    code = "non_terminating_model"


class EmptyGroup(FairsteerError):
    """A parity probe group matched no samples."""

    code = "empty_group"


class CorruptBundle(FairsteerError):
    """A persisted session bundle failed to load; names the bad component."""

    code = "corrupt_bundle"

    def __init__(self, component: str, detail: str = ""):
        self.component = component
        msg = f"bundle component {component!r} is missing or unreadable"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
