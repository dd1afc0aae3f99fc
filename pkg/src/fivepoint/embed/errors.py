"""Failures of the embedding constructions."""


class EmbedError(ValueError):
    pass


class NotPSD(EmbedError):
    def __init__(self, eigenvalue, eigenvector):
        self.eigenvalue = float(eigenvalue)
        self.eigenvector = list(map(float, eigenvector))
        super().__init__(f"associated form has eigenvalue {self.eigenvalue:.6g}")


class NotCyclic(EmbedError):
    def __init__(self, index, slack):
        self.index, self.slack = index, slack
        super().__init__(f"tense equality fails at position {index} (slack {slack:.3g})")


class ThetaInfeasible(EmbedError):
    pass


class ConditionGroupFailed(EmbedError):
    def __init__(self, group, index, slack):
        self.group, self.index, self.slack = group, index, slack
        super().__init__(f"condition {group}[{index}] fails with slack {slack:.3g}")


class ConeTriangleError(EmbedError):
    pass


class ApexOutside(ConeTriangleError):
    pass


class InfeasibleArcs(EmbedError):
    pass


class InfeasibleBalls(EmbedError):
    pass


class DecompositionMismatch(EmbedError):
    def __init__(self, pair, residual):
        self.pair, self.residual = pair, residual
        super().__init__(f"squared distances do not add up at {pair} (residual {residual:.3g})")


class NotConstructive(EmbedError):
    """LSS holds but no construction applies (the metric is not extremal)."""


class LssFails(EmbedError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"LSS inequality fails with center {report.center} "
                         f"(minimum {report.min_value:.6g} at {report.argmin.round(6).tolist()})")
