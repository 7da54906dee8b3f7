"""Exception hierarchy shared by every stage of the audit pipeline."""


class V2GError(Exception):
    """Base class for all audit errors."""


# -- DXF parsing -------------------------------------------------------------


class DXFError(V2GError):
    pass


class BinaryDXFError(DXFError):
    def __init__(self):
        super().__init__("binary DXF is not supported; export as ASCII DXF")


class OddLineCount(DXFError):
    def __init__(self, lines: int):
        self.lines = lines
        super().__init__(f"truncated DXF stream: {lines} lines, expected an even count")


class NonIntegerCode(DXFError):
    def __init__(self, line_no: int, text: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: group code {text!r} is not an integer")


class UnresolvedBlock(DXFError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"INSERT references undefined block {name!r}")


class MalformedEntity(DXFError):
    def __init__(self, handle: str, reason: str):
        self.handle = handle
        self.reason = reason
        super().__init__(f"entity {handle}: {reason}")


# -- graph construction ------------------------------------------------------


class BuildError(V2GError):
    pass


class DegenerateWire(BuildError):
    def __init__(self, handle: str):
        self.handle = handle
        super().__init__(f"wire {handle} collapses to a single connection point")


class ConflictingAttribute(BuildError):
    def __init__(self, node_id, key: str, values):
        self.node_id = node_id
        self.key = key
        super().__init__(f"node {node_id}: conflicting values for {key!r}: {sorted(values)}")


# -- graph maths -------------------------------------------------------------


class EigensolveFailure(V2GError):
    pass


class InconsistentComponentCount(V2GError):
    def __init__(self, spectral: int, combinatorial: int):
        self.spectral = spectral
        self.combinatorial = combinatorial
        super().__init__(
            f"spectral component count {spectral} != union-find count {combinatorial}"
        )


# -- checks and planning -----------------------------------------------------


class EmptyRegion(V2GError):
    def __init__(self, function_id: str, reason: str = "no relevant nodes in region"):
        self.function_id = function_id
        super().__init__(f"{function_id}: {reason}")


class NoTemplateMatch(V2GError):
    def __init__(self, rule_id: str):
        self.rule_id = rule_id
        super().__init__(f"rule {rule_id}: no planner template matches")


class UnknownRegion(V2GError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown region selector {name!r}")


# -- benchmark ---------------------------------------------------------------


class UnknownKind(V2GError):
    def __init__(self, kind):
        super().__init__(f"unknown check kind {kind!r}")


class NoDiscordantPairs(V2GError):
    def __init__(self):
        super().__init__("McNemar test undefined: no discordant pairs")


class EmptySample(V2GError):
    def __init__(self):
        super().__init__("bootstrap needs at least one observation")


class ManifestError(V2GError):
    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"suite manifest {path}: {reason}")
