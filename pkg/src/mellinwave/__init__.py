"""Scale-domain filtering with analytic wavelets and the Mellin transform."""

from .exceptions import (
    AdmissibilityError,
    ContourError,
    DomainError,
    GridError,
    LengthError,
    MellinDivergenceError,
    MellinWaveError,
    NonPowerLawError,
    NumericalError,
    ParameterError,
    ParseError,
    TruncationError,
    ValidationError,
)
from .signal_core import (
    Signal,
    Spectrum,
    analytic_part,
    fft,
    generate_test_signal,
    ifft,
    load_signal,
    save_signal,
)
from .mellin import (
    LogGrid,
    MellinContour,
    MellinFunction,
    mellin_forward,
    mellin_inverse,
    mellin_product_check,
    scaling_convolve,
)
from .wavelets import Wavelet, cauchy_wavelet, parse_wavelet, sampled_wavelet
from .filters import (
    AdmissibilityReport,
    DifferentialOperatorSpec,
    FrequencyFilter,
    PowerTerm,
    ScaleFilter,
    check_admissibility,
    derive_scale_filter,
    differential_filter,
    filter_from_spec,
    hilbert_filter,
    hilbert_frequency_filter,
    identity_filter,
    identity_frequency_filter,
    polynomial_filter,
    power_filter,
    power_law_filter,
    split_signs,
)
from .transform import (
    Scaleogram,
    ScaleTimeGrid,
    apply_scale_filter,
    cwt_forward,
    effective_symbol,
    load_scaleogram,
    parseval_pair,
    reconstruct,
    save_scaleogram,
    weighted_energy,
)
from .harness import (
    ComparisonReport,
    ExponentEstimate,
    apply_frequency_filter,
    compare_paths,
    denoise_power_law,
    estimate_spectral_exponent,
)
from .estimators import (
    PowerLawDenoiser,
    ScaleFilterTransformer,
    SpectralExponentEstimator,
    WaveletTransform,
    check_signals,
)

__version__ = "0.1.0"
