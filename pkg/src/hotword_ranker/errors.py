"""Exception types shared across the package."""


class HotwordRankerError(Exception):
    """Base class for all package-specific errors."""


class IllegalSyllable(HotwordRankerError):
    pass


class EmptyPhonemeSequence(HotwordRankerError):
    pass


class UnknownPhoneme(HotwordRankerError):
    pass


class EmptyBank(HotwordRankerError):
    pass


class CorruptBank(HotwordRankerError):
    pass


class VocabMismatch(HotwordRankerError):
    pass


class CorruptModel(HotwordRankerError):
    pass


class ZeroVectorRow(HotwordRankerError):
    pass


class ShapeMismatch(HotwordRankerError):
    pass


class NonFiniteLoss(HotwordRankerError):
    pass


class TargetUnreachable(HotwordRankerError):
    pass


class InsufficientDistractors(HotwordRankerError):
    pass


class LengthMismatch(HotwordRankerError):
    pass
