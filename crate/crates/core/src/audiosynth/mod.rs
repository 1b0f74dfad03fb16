//! Multichannel microphone audio for a scenario: engine sources, ambient
//! noise, distance/pattern attenuation, wireless cutouts and WAV I/O.

pub mod cutout;
pub mod engine;
pub mod mix;
pub mod noise;
pub mod wav;

pub use cutout::{apply_cutout, CutoutModel};
pub use engine::{synth_engine, EngineSoundParams};
pub use mix::{mix_scene, mix_scene_with, MicPattern, MixOptions, MultichannelAudio};
pub use noise::{add_noise, AmbientSpectrum, NoiseEvent, NoiseEventKind, NoiseSpec};
pub use wav::{read_multichannel, write_multichannel, AudioManifest};
