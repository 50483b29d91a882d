"""Compressive spread-spectrum CDMA receiver simulator."""

from .baseband import (
    BitBlock,
    NoisyObservation,
    SparseSymbolVector,
    add_awgn,
    count_bit_errors,
    decode,
    encode,
    random_bit_block,
    theoretical_ber_mfsk,
)
from .errors import (
    ConfigError,
    CssimError,
    DimensionMismatch,
    InvalidPair,
    InvalidRatio,
    LengthMismatch,
    NotMaximumLength,
    RankDeficient,
    RateMismatch,
    SingularSubproblem,
    SupportOutOfRange,
)
from .gold import (
    FeedbackPolynomial,
    GoldDictionary,
    MSequence,
    build_gold_dictionary,
    generate_m_sequence,
    periodic_correlation,
    t_value,
)
from .pursuit import (
    ComplexityModel,
    PredictedCost,
    PursuitProblem,
    PursuitResult,
    ls_cost,
    predicted_cost,
    subspace_pursuit,
)
from .rfchain import (
    ChainConfig,
    OversampledSignal,
    down_convert,
    matched_filter_and_sample,
    pulse_shape,
    quantize_uniform,
    rrc_taps,
    transmit_receive,
    up_convert,
)
from .sampling import (
    MeasurementOperator,
    Prewhitener,
    build_operator,
    build_prewhitener,
)

__version__ = "0.1.0"
