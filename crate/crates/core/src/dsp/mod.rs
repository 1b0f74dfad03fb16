//! Time-frequency frontend: audio windows, STFT magnitude spectrograms and
//! their normalisation.

mod export;
mod stft;
mod window;

pub use export::{read_spectrogram_bin, spectrogram_to_pgm, write_spectrogram_bin, SPECTROGRAM_MAGIC};
pub use stft::{normalize, stft_complex, stft_magnitude, window_coeffs, Spectrogram, Stft, StftConfig, WindowKind};
pub use window::{extract_segment, extract_window, extract_window_with, window_samples, WindowAnchor, DEFAULT_WINDOW_S};
