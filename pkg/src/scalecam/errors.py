"""Exception and warning hierarchy shared by every stage."""


class ScalecamError(Exception):
    """Base class for all structured errors raised by this package.

    Pipeline code attaches ``stage`` and ``frame_id`` so that a failure deep
    inside a sub-operation can be traced back to where it happened.
    """

    def __init__(self, message="", *, stage=None, frame_id=None):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.frame_id = frame_id

    def with_context(self, *, stage=None, frame_id=None):
        if self.stage is None and stage is not None:
            self.stage = stage
        if self.frame_id is None and frame_id is not None:
            self.frame_id = frame_id
        return self

    def __str__(self):
        parts = []
        if self.stage is not None:
            parts.append(f"stage={self.stage}")
        if self.frame_id is not None:
            parts.append(f"frame={self.frame_id}")
        prefix = f"[{' '.join(parts)}] " if parts else ""
        return f"{prefix}{type(self).__name__}: {self.message}"


# mesh-core
class InvalidMesh(ScalecamError, ValueError):
    pass


class SpaceMismatch(ScalecamError, ValueError):
    pass


class NonManifoldInput(ScalecamError):
    pass


class NotWatertight(ScalecamError):
    def __init__(self, boundary_edge_count, non_manifold_edge_count=0, **kw):
        msg = (f"mesh is not watertight: {boundary_edge_count} boundary edges, "
               f"{non_manifold_edge_count} non-manifold edges")
        super().__init__(msg, **kw)
        self.boundary_edge_count = boundary_edge_count
        self.non_manifold_edge_count = non_manifold_edge_count


class MalformedObj(ScalecamError):
    def __init__(self, message, line=None, **kw):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, **kw)
        self.line = line


class NonTriangulatableFace(MalformedObj):
    pass


# camera-geometry
class NonRigidPose(ScalecamError, ValueError):
    pass


class InvalidCamera(ScalecamError, ValueError):
    pass


class VertexBehindCamera(ScalecamError):
    def __init__(self, vertex_index, **kw):
        super().__init__(f"vertex {vertex_index} has clip w <= 0", **kw)
        self.vertex_index = vertex_index


class DegenerateExtent(ScalecamError):
    pass


class NonSquareImage(ScalecamError):
    pass


# scale-recovery
class EmptyMask(ScalecamError):
    pass


class NoValidDepth(ScalecamError):
    pass


class NonPositiveInput(ScalecamError, ValueError):
    pass


class ZeroTruth(ScalecamError, ValueError):
    pass


# synthetic-oracle
class ObjectOutsideFrustum(ScalecamError):
    pass


# pipeline-io
class ManifestError(ScalecamError):
    pass


class MissingField(ManifestError):
    def __init__(self, name, **kw):
        super().__init__(f"missing field {name!r}", **kw)
        self.name = name


class DanglingPath(ManifestError):
    def __init__(self, path, **kw):
        super().__init__(f"referenced file does not exist: {path}", **kw)
        self.path = path


class VersionUnsupported(ManifestError):
    pass


class WrongCount(ScalecamError):
    pass


class NonPositiveDimension(ScalecamError):
    pass


class MalformedHeader(ScalecamError):
    pass


class RigidityViolation(NonRigidPose):
    pass


class DimensionMismatch(ScalecamError):
    pass


class IoFailure(ScalecamError):
    pass


# warnings
class ScalecamWarning(UserWarning):
    pass


class SelfIntersectingLoop(ScalecamWarning):
    pass


class InwardWinding(ScalecamWarning):
    pass


class IgnoredRecord(ScalecamWarning):
    pass
