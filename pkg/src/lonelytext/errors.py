"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
1 for usage/contract violations, 2 for bad input data, 3 for numerical
failures.
"""


class LonelyTextError(Exception):
    exit_code = 1


class ContractError(LonelyTextError):
    exit_code = 1


class DataError(LonelyTextError):
    exit_code = 2


class MalformedRecord(DataError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class UnknownChannel(MalformedRecord):
    pass


class ScoreOutOfRange(MalformedRecord):
    pass


class EmptyDataset(DataError):
    pass


class EmptyVocabulary(DataError):
    pass


class SingleClassTraining(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class ModelVocabMismatch(ContractError):
    pass


class DimensionMismatch(ContractError):
    pass


class InvalidTopicCount(ContractError):
    pass


class InvalidSpec(ContractError):
    pass


class LengthMismatch(ContractError):
    pass


class TooShort(ContractError):
    pass


class EmptyInput(ContractError):
    pass


class TooFewExamples(ContractError):
    pass


class WrongFeatureKind(ContractError):
    pass


class NumericalFailure(LonelyTextError):
    exit_code = 3
