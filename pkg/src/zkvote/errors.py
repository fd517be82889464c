"""Exception hierarchy shared across the package."""


class ZkvoteError(Exception):
    """Base class for all package errors."""


class ConfigError(ZkvoteError):
    """Invalid or inconsistent configuration."""


class InvalidParametersError(ZkvoteError):
    """Group parameters failed primality/order verification."""


class EntropyError(ZkvoteError):
    """The randomness source failed."""


class ProverError(ZkvoteError):
    """Prover-side precondition violated; refusing to produce a proof."""


class NotEligibleError(ZkvoteError):
    """voter_id is not on the eligible-voter roll."""


class AlreadyRegisteredError(ZkvoteError):
    """voter_id was registered before."""


class LedgerError(ZkvoteError):
    """Nullifier ledger could not be persisted; the vote must not proceed."""


class ProtocolOrderError(ZkvoteError):
    """Operation called out of protocol order (e.g. decide without a pending ballot)."""


class WrongVariantError(ZkvoteError):
    """A confirmed receipt was passed where an audited one is required, or vice versa."""


class ReceiptFormatError(ZkvoteError):
    """Receipt or board record does not parse."""


class DecodeError(ZkvoteError):
    """Tally does not decode to per-candidate counts (bound violation or corruption)."""


class IncompleteElectionError(ZkvoteError):
    """Verification requested but the final tally is missing."""


class NotFoundError(ZkvoteError):
    """Requested record does not exist."""
