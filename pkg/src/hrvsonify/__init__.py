"""RR-interval HRV analysis, fuzzy clustering and formant sonification."""

from .errors import ConfigError, DataError, HrvSonifyError
from .rr_ingest import RRSeries, filter_artifacts, parse_rr_file, write_rr_file
from .hrv_features import (
    FEATURE_ORDER,
    FeatureMatrix,
    FeatureVector,
    avnn,
    concat_features,
    pnnx,
    record_features,
    rmssd,
    sdnn,
    windowed_features,
)
from .clustering import (
    FcmConfig,
    FcmResult,
    fcm,
    hard_labels,
    init_partition,
    objective,
    pairwise_plot_data,
    update_centers,
    update_partition,
    zscore,
)
from .sonifier import (
    AudioBuffer,
    Formant,
    FormantCascade,
    PulseOscillator,
    SonificationConfig,
    VowelState,
    formant_filter,
    interpolate_vowel,
    map_controls,
    normalize_series,
    pulse_oscillator,
    read_wav,
    render_sonification,
    write_wav,
)
from .spectrogram import (
    Spectrogram,
    compute_spectrogram,
    fundamental_track,
    render_png,
)

__version__ = "0.1.0"
